#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "chexlab/encoder.hpp"
#include "chexlab/taxonomy.hpp"

namespace chexlab {

struct ModelHeader {
    int format_version = 1;
    EncoderParams encoder;
    std::vector<std::string> categories;  // canonical 13 keys, verified on load
    std::string train_manifest_hash;

    bool operator==(const ModelHeader&) const = default;
};

// Linear multi-label classifier over hashed features. Weights are kept
// feature-major (13 contiguous doubles per feature) for sparse access;
// the file format stores them category-major (13 rows).
struct TrainedModel {
    ModelHeader header;
    std::vector<double> weights;  // dim * 13, weights[j * 13 + c]
    std::array<double, kNumCategories> bias{};

    double& at(std::size_t feature, int category) { return weights[feature * kNumCategories + category]; }
    double at(std::size_t feature, int category) const { return weights[feature * kNumCategories + category]; }
};

TrainedModel make_zero_model(const EncoderParams& params);

// Container layout: magic "CXGPT1", little-endian u32 header length, header
// JSON, then 13 rows of dim little-endian f64 weights, then 13 biases.
void save_model(std::ostream& out, const TrainedModel& model);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(std::istream& in);
TrainedModel load_model(const std::filesystem::path& path);

struct Prediction {
    std::array<double, kNumCategories> probabilities{};
    LabelVector label;
};

// probability = sigmoid(w.x + b); Positive iff probability > threshold
// (strictly, so an all-zero model labels nothing at the default 0.5).
Prediction predict(const TrainedModel& model, std::string_view section_text,
                   double threshold = 0.5, std::string study_id = {},
                   SectionChoice section = SectionChoice::Findings);

}  // namespace chexlab
