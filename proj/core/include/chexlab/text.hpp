#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace chexlab {

// Collapses every whitespace run (space, tab, CR, LF, form feed, vertical
// tab) to a single space and trims the ends. All other bytes pass through
// untouched, so multi-byte UTF-8 sequences are preserved. Idempotent.
std::string normalize_text(std::string_view raw);

// A lowercased word token plus its byte span in the source text.
struct Token {
    std::string text;
    std::size_t begin = 0;  // byte offset of first char
    std::size_t end = 0;    // byte offset one past last char
};

// Splits text into word tokens: maximal runs of ASCII alphanumerics or
// non-ASCII bytes. Punctuation separates tokens and is dropped. ASCII
// letters are lowercased.
std::vector<Token> tokenize(std::string_view text);

std::string to_lower_ascii(std::string_view s);

// Sentence boundaries for rule labeling: '.', ';' and ':' terminate a
// sentence when followed by whitespace or end of text (so "3.5 cm" stays
// intact). Returns [begin, end) byte ranges, boundary chars excluded.
std::vector<std::pair<std::size_t, std::size_t>> split_sentences(std::string_view text);

}  // namespace chexlab
