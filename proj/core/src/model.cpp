#include "chexlab/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "chexlab/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "model container assumes a little-endian host");

namespace chexlab {

namespace {

constexpr char kMagic[6] = {'C', 'X', 'G', 'P', 'T', '1'};

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> canonical_category_keys() {
    std::vector<std::string> keys;
    for (Category c : all_categories()) keys.emplace_back(category_key(c));
    return keys;
}

}  // namespace

TrainedModel make_zero_model(const EncoderParams& params) {
    TrainedModel model;
    model.header.encoder = params;
    model.header.categories = canonical_category_keys();
    model.weights.assign(params.dim() * kNumCategories, 0.0);
    return model;
}

void save_model(std::ostream& out, const TrainedModel& model) {
    ordered_json h;
    h["format_version"] = model.header.format_version;
    h["feature_bits"] = model.header.encoder.feature_bits;
    h["hash_seed"] = model.header.encoder.hash_seed;
    h["max_tokens"] = model.header.encoder.max_tokens;
    h["max_ngram"] = model.header.encoder.max_ngram;
    h["categories"] = model.header.categories;
    h["train_manifest_hash"] = model.header.train_manifest_hash;
    std::string header = h.dump();

    out.write(kMagic, sizeof kMagic);
    std::uint32_t len = static_cast<std::uint32_t>(header.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    // feature-major in memory -> 13 category rows on disk
    std::size_t dim = model.header.encoder.dim();
    std::vector<double> row(dim);
    for (int c = 0; c < kNumCategories; ++c) {
        for (std::size_t j = 0; j < dim; ++j) row[j] = model.at(j, c);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(dim * sizeof(double)));
    }
    out.write(reinterpret_cast<const char*>(model.bias.data()),
              static_cast<std::streamsize>(model.bias.size() * sizeof(double)));
    if (!out) raise(ErrorKind::Io, "model write failed");
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    save_model(out, model);
}

TrainedModel load_model(std::istream& in) {
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        raise(ErrorKind::ModelFormat, "bad magic bytes (not a model file)");
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || len == 0 || len > (1u << 20)) raise(ErrorKind::ModelFormat, "bad header length");
    std::string header(len, '\0');
    in.read(header.data(), len);
    if (!in) raise(ErrorKind::ModelFormat, "truncated header");

    TrainedModel model;
    try {
        ordered_json h = ordered_json::parse(header);
        model.header.format_version = h.at("format_version").get<int>();
        model.header.encoder.feature_bits = h.at("feature_bits").get<int>();
        model.header.encoder.hash_seed = h.at("hash_seed").get<std::uint64_t>();
        model.header.encoder.max_tokens = h.at("max_tokens").get<int>();
        model.header.encoder.max_ngram = h.at("max_ngram").get<int>();
        model.header.categories = h.at("categories").get<std::vector<std::string>>();
        model.header.train_manifest_hash = h.at("train_manifest_hash").get<std::string>();
    } catch (const ordered_json::exception& e) {
        raise(ErrorKind::ModelFormat, std::string("bad header: ") + e.what());
    }
    if (model.header.format_version != 1)
        raise(ErrorKind::ModelFormat,
              "unsupported format version " + std::to_string(model.header.format_version));
    if (model.header.categories != canonical_category_keys())
        raise(ErrorKind::ModelFormat, "model category list is not the canonical 13");
    if (model.header.encoder.feature_bits < 1 || model.header.encoder.feature_bits > 30)
        raise(ErrorKind::ModelFormat, "implausible feature_bits");

    std::size_t dim = model.header.encoder.dim();
    model.weights.assign(dim * kNumCategories, 0.0);
    std::vector<double> row(dim);
    for (int c = 0; c < kNumCategories; ++c) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(dim * sizeof(double)));
        if (!in) raise(ErrorKind::ModelFormat, "truncated weight rows");
        for (std::size_t j = 0; j < dim; ++j) model.at(j, c) = row[j];
    }
    in.read(reinterpret_cast<char*>(model.bias.data()),
            static_cast<std::streamsize>(model.bias.size() * sizeof(double)));
    if (!in) raise(ErrorKind::ModelFormat, "truncated bias block");
    return model;
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open model file " + path.string());
    return load_model(in);
}

Prediction predict(const TrainedModel& model, std::string_view section_text, double threshold,
                   std::string study_id, SectionChoice section) {
    FeatureVec features = encode(section_text, model.header.encoder);
    Prediction p;
    p.label = LabelVector::binary(std::move(study_id), section);
    for (int c = 0; c < kNumCategories; ++c) {
        double z = model.bias[static_cast<std::size_t>(c)];
        for (const auto& [j, x] : features) z += model.at(j, c) * static_cast<double>(x);
        double prob = 1.0 / (1.0 + std::exp(-z));
        p.probabilities[static_cast<std::size_t>(c)] = prob;
        if (prob > threshold)
            p.label.set(static_cast<Category>(c), PresenceLabel::Positive);
    }
    return p;
}

}  // namespace chexlab
