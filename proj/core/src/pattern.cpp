#include "chexlab/pattern.hpp"

#include "chexlab/error.hpp"

namespace chexlab {

TokenPattern compile_pattern(std::string_view pattern) {
    TokenPattern out;
    out.source = std::string(pattern);

    // '*' is meaningful only at the end of a word; tokenize() would drop it,
    // so scan words manually around it.
    std::string word;
    bool prefix = false;
    auto flush = [&] {
        if (word.empty()) return;
        for (const Token& t : tokenize(word)) {
            out.words.push_back(PatternWord{t.text, false});
        }
        if (prefix && !out.words.empty()) out.words.back().prefix = true;
        word.clear();
        prefix = false;
    };
    for (char c : pattern) {
        if (c == ' ' || c == '\t') {
            flush();
        } else if (c == '*') {
            prefix = true;
        } else {
            word.push_back(c);
        }
    }
    flush();

    if (out.words.empty())
        raise(ErrorKind::LexiconParse, "empty pattern '" + out.source + "'");
    return out;
}

bool pattern_matches_at(const TokenPattern& p, std::span<const Token> tokens, std::size_t at) {
    if (at + p.words.size() > tokens.size()) return false;
    for (std::size_t j = 0; j < p.words.size(); ++j) {
        if (!p.words[j].matches(tokens[at + j].text)) return false;
    }
    return true;
}

std::optional<std::size_t> find_pattern(const TokenPattern& p, std::span<const Token> tokens,
                                        std::size_t from) {
    if (p.words.empty() || tokens.size() < p.words.size()) return std::nullopt;
    for (std::size_t i = from; i + p.words.size() <= tokens.size(); ++i) {
        if (pattern_matches_at(p, tokens, i)) return i;
    }
    return std::nullopt;
}

bool pattern_matches_anywhere(const TokenPattern& p, std::span<const Token> tokens) {
    return find_pattern(p, tokens, 0).has_value();
}

}  // namespace chexlab
