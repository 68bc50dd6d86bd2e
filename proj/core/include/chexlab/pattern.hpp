#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chexlab/text.hpp"

namespace chexlab {

// A word-sequence pattern matched against tokenized text. Each pattern word
// matches one token: exactly by default, or as a prefix stem when written
// with a trailing '*' (e.g. "opacit*" matches "opacity" and "opacities").
// Matching is case-insensitive and punctuation-free because both sides go
// through tokenize(). No other wildcard or regex feature exists.
struct PatternWord {
    std::string stem;
    bool prefix = false;

    bool matches(std::string_view token) const {
        if (prefix) return token.size() >= stem.size() && token.starts_with(stem);
        return token == stem;
    }
    bool operator==(const PatternWord&) const = default;
};

struct TokenPattern {
    std::string source;  // original pattern text, kept for rendering
    std::vector<PatternWord> words;

    bool operator==(const TokenPattern&) const = default;
};

// Throws LexiconParse when the pattern has no word tokens.
TokenPattern compile_pattern(std::string_view pattern);

bool pattern_matches_at(const TokenPattern& p, std::span<const Token> tokens, std::size_t at);

// First match at or after `from`; index of the first matched token.
std::optional<std::size_t> find_pattern(const TokenPattern& p, std::span<const Token> tokens,
                                        std::size_t from = 0);

bool pattern_matches_anywhere(const TokenPattern& p, std::span<const Token> tokens);

}  // namespace chexlab
