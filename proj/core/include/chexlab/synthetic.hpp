#pragma once

#include <cstdint>
#include <vector>

#include "chexlab/corpus.hpp"

namespace chexlab {

// Deterministic synthetic report generator over the shipped lexicon's
// vocabulary: positive, negated, hedged and filler sentences assembled per
// section. Used by the offline end-to-end tests; labels come from whatever
// labeler runs on the generated text, not from generation intent.
struct SyntheticOptions {
    std::uint64_t seed = 1;
    std::size_t count = 1000;
    std::string id_prefix = "syn";
    int min_findings_sentences = 5;
    int max_findings_sentences = 9;
    int min_impression_sentences = 1;
    int max_impression_sentences = 2;
    // per-sentence outcome weights
    double positive_weight = 0.55;
    double negative_weight = 0.22;
    double uncertain_weight = 0.08;
    double filler_weight = 0.15;
};

std::vector<CorpusRecord> generate_synthetic_corpus(const SyntheticOptions& options);

}  // namespace chexlab
