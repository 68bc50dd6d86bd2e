#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "chexlab/corpus.hpp"
#include "chexlab/model.hpp"
#include "chexlab/taxonomy.hpp"

namespace chexlab {

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
};

// Training contract: 10K steps, lr 5e-5 halved every 4K steps, batch 32,
// inputs truncated to 512 tokens, AdamW with default moments, binary
// cross-entropy loss.
struct TrainConfig {
    long steps = 10000;
    double learning_rate = 5e-5;
    int batch_size = 32;
    long lr_halving_interval = 4000;
    int max_tokens = 512;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> warm_start;
    double threshold = 0.5;
    AdamParams adam;
    EncoderParams encoder;
    long log_every = 100;

    void validate() const;  // throws Config on nonsense values
};

// learning_rate * 2^-(floor(step / interval)), step counted from 0.
double lr_at_step(const TrainConfig& config, long step);

// Mean over the 13 categories of the stabilized binary cross-entropy
// -[t log s(z) + (1-t) log(1-s(z))], via the softplus form.
double bce_loss(std::span<const double> logits, std::span<const std::uint8_t> targets);
// d(bce_loss)/d(logit_c) = (sigmoid(z_c) - t_c) / 13.
void bce_loss_gradient(std::span<const double> logits, std::span<const std::uint8_t> targets,
                       std::span<double> grad_out);

struct EncodedExample {
    FeatureVec features;
    std::array<std::uint8_t, kNumCategories> targets{};
};

// Batch-mean loss and its analytic gradient for the full linear objective;
// the quantities the training loop descends and the finite-difference suite
// checks.
double batch_objective(const TrainedModel& model, std::span<const EncodedExample> batch);
void batch_gradient(const TrainedModel& model, std::span<const EncodedExample> batch,
                    std::vector<double>& grad_weights, std::array<double, kNumCategories>& grad_bias);

struct TrainLogEntry {
    long step;
    double lr;
    double loss;
};

struct TrainResult {
    TrainedModel model;
    std::vector<TrainLogEntry> log;
};

// Runs exactly config.steps AdamW mini-batch updates over seed-shuffled
// examples; deterministic (bitwise) for a fixed seed. Labels must be binary
// and every labeled study must resolve to corpus text for its section.
// Sparse gradients use lazily caught-up per-weight state, which reproduces a
// dense AdamW trajectory exactly.
TrainResult train(const std::vector<CorpusRecord>& corpus, const LabelTable& labels,
                  const TrainConfig& config);

void write_train_log_jsonl(std::ostream& out, const std::vector<TrainLogEntry>& log);

struct CurvePoint {
    std::size_t train_size;
    double macro_f1;
};

// Trains once per size on a seed-deterministic subset of the pseudo-labels
// and scores macro-F1 against the gold table, per section.
std::map<SectionChoice, std::vector<CurvePoint>> learning_curve(
    const std::vector<CorpusRecord>& corpus, const LabelTable& pseudo_labels,
    std::span<const std::size_t> sizes, const LabelTable& gold, const TrainConfig& config);

}  // namespace chexlab
