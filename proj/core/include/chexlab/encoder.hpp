#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace chexlab {

// Reference encoder: hashed word uni/bi-grams over the first max_tokens
// word tokens, bucketed into 2^feature_bits counts. Deterministic for a
// fixed seed. A transformer-backed encoder can replace this behind the same
// sparse-feature interface.
struct EncoderParams {
    int feature_bits = 18;
    std::uint64_t hash_seed = 0x43584750;  // fixed default, recorded in model headers
    int max_tokens = 512;
    int max_ngram = 2;

    std::size_t dim() const { return std::size_t(1) << feature_bits; }
    bool operator==(const EncoderParams&) const = default;
};

// Sorted by feature index, indices unique, values are n-gram counts.
using FeatureVec = std::vector<std::pair<std::uint32_t, float>>;

FeatureVec encode(std::string_view text, const EncoderParams& params);

}  // namespace chexlab
