#include "chexlab/encoder.hpp"

#include <algorithm>

#include "chexlab/text.hpp"

namespace chexlab {

namespace {

// Seeded FNV-1a over the n-gram bytes; grams joined with a 0x1f separator.
std::uint64_t fnv1a(std::uint64_t seed, std::string_view data) {
    std::uint64_t h = seed ^ 0xcbf29ce484222325ULL;
    for (unsigned char byte : data) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

FeatureVec encode(std::string_view text, const EncoderParams& params) {
    auto tokens = tokenize(text);
    std::size_t n = std::min<std::size_t>(tokens.size(), static_cast<std::size_t>(params.max_tokens));
    std::uint64_t mask = params.dim() - 1;

    std::vector<std::uint32_t> indices;
    indices.reserve(n * static_cast<std::size_t>(params.max_ngram));
    std::string gram;
    for (std::size_t i = 0; i < n; ++i) {
        gram = tokens[i].text;
        indices.push_back(static_cast<std::uint32_t>(fnv1a(params.hash_seed, gram) & mask));
        for (int order = 2; order <= params.max_ngram; ++order) {
            if (i + static_cast<std::size_t>(order) > n) break;
            gram += '\x1f';
            gram += tokens[i + static_cast<std::size_t>(order) - 1].text;
            indices.push_back(static_cast<std::uint32_t>(fnv1a(params.hash_seed, gram) & mask));
        }
    }

    std::sort(indices.begin(), indices.end());
    FeatureVec out;
    for (std::size_t i = 0; i < indices.size();) {
        std::size_t j = i;
        while (j < indices.size() && indices[j] == indices[i]) ++j;
        out.emplace_back(indices[i], static_cast<float>(j - i));
        i = j;
    }
    return out;
}

}  // namespace chexlab
