#include "chexlab/text.hpp"

#include <cctype>

namespace chexlab {

namespace {

bool is_space_byte(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_byte(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isalnum(u) != 0 || u >= 0x80;
}

}  // namespace

std::string normalize_text(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char c : raw) {
        if (is_space_byte(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_word_byte(text[i])) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        std::string word;
        while (i < text.size() && is_word_byte(text[i])) {
            unsigned char u = static_cast<unsigned char>(text[i]);
            word.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : text[i]);
            ++i;
        }
        tokens.push_back(Token{std::move(word), begin, i});
    }
    return tokens;
}

std::string to_lower_ascii(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        unsigned char u = static_cast<unsigned char>(c);
        out.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> split_sentences(std::string_view text) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        bool boundary = (c == '.' || c == ';' || c == ':') &&
                        (i + 1 == text.size() || is_space_byte(text[i + 1]));
        if (boundary) {
            if (i > start) spans.emplace_back(start, i);
            start = i + 1;
        }
    }
    if (start < text.size()) spans.emplace_back(start, text.size());
    return spans;
}

}  // namespace chexlab
