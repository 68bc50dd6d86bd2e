#include "chexlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "chexlab/digest.hpp"
#include "chexlab/error.hpp"
#include "chexlab/metrics.hpp"

namespace chexlab {

namespace {

struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    std::size_t bounded(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

// Fisher-Yates with our own rng so shuffles are identical across platforms.
void shuffle_indices(std::vector<std::uint32_t>& idx, SplitMix64& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::size_t j = rng.bounded(i);
        std::swap(idx[i - 1], idx[j]);
    }
}

using Example = EncodedExample;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Once both moments decay below this they are exactly zero for every
// representable purpose (the update term falls 250+ orders of magnitude
// below one ulp of any weight), so they are flushed to keep the zero-state
// fast path reachable.
constexpr double kMomentFlush = 1e-290;

// AdamW over the feature-major weight table with lazily applied per-feature
// updates. Every weight sees the exact same sequence of arithmetic a dense
// step-by-step loop would apply; idle steps (zero gradient) are replayed
// when the feature next activates and once more at the end of training.
class LazyAdamW {
public:
    LazyAdamW(TrainedModel& model, const TrainConfig& config)
        : model_(model),
          config_(config),
          dim_(model.header.encoder.dim()),
          m_(dim_ * kNumCategories, 0.0),
          v_(dim_ * kNumCategories, 0.0),
          last_(dim_, -1) {
        lr_.resize(static_cast<std::size_t>(config.steps));
        corr1_.resize(static_cast<std::size_t>(config.steps));
        corr2_.resize(static_cast<std::size_t>(config.steps));
        double b1t = 1.0;
        double b2t = 1.0;
        for (long s = 0; s < config.steps; ++s) {
            auto si = static_cast<std::size_t>(s);
            lr_[si] = lr_at_step(config, s);
            b1t *= config.adam.beta1;
            b2t *= config.adam.beta2;
            corr1_[si] = 1.0 - b1t;
            corr2_[si] = 1.0 - b2t;
        }
    }

    // Replays steps [last_[j]+1, upto) with zero gradient.
    void catch_up(std::size_t j, long upto) {
        long from = last_[j] + 1;
        if (from >= upto) return;
        bool all_zero = true;
        for (int c = 0; c < kNumCategories; ++c) {
            std::size_t k = j * kNumCategories + static_cast<std::size_t>(c);
            if (model_.weights[k] != 0.0 || m_[k] != 0.0 || v_[k] != 0.0) {
                all_zero = false;
                break;
            }
        }
        if (!all_zero) {
            for (int c = 0; c < kNumCategories; ++c) {
                std::size_t k = j * kNumCategories + static_cast<std::size_t>(c);
                for (long s = from; s < upto; ++s) update_weight(k, s, 0.0);
            }
        }
        last_[j] = upto - 1;
    }

    void apply(std::size_t j, long step, const std::array<double, kNumCategories>& grad) {
        catch_up(j, step);
        for (int c = 0; c < kNumCategories; ++c) {
            update_weight(j * kNumCategories + static_cast<std::size_t>(c), step,
                          grad[static_cast<std::size_t>(c)]);
        }
        last_[j] = step;
    }

    void apply_bias(long step, const std::array<double, kNumCategories>& grad) {
        const AdamParams& a = config_.adam;
        auto si = static_cast<std::size_t>(step);
        for (int c = 0; c < kNumCategories; ++c) {
            auto ci = static_cast<std::size_t>(c);
            bm_[ci] = a.beta1 * bm_[ci] + (1.0 - a.beta1) * grad[ci];
            bv_[ci] = a.beta2 * bv_[ci] + (1.0 - a.beta2) * grad[ci] * grad[ci];
            double mhat = bm_[ci] / corr1_[si];
            double vhat = bv_[ci] / corr2_[si];
            // bias is conventionally exempt from weight decay
            model_.bias[ci] -= lr_[si] * (mhat / (std::sqrt(vhat) + a.epsilon));
        }
    }

    void finish() {
        for (std::size_t j = 0; j < dim_; ++j) catch_up(j, config_.steps);
    }

private:
    void update_weight(std::size_t k, long step, double g) {
        const AdamParams& a = config_.adam;
        auto si = static_cast<std::size_t>(step);
        m_[k] = a.beta1 * m_[k] + (1.0 - a.beta1) * g;
        v_[k] = a.beta2 * v_[k] + (1.0 - a.beta2) * g * g;
        if (std::fabs(m_[k]) < kMomentFlush && v_[k] < kMomentFlush) {
            m_[k] = 0.0;
            v_[k] = 0.0;
        }
        double mhat = m_[k] / corr1_[si];
        double vhat = v_[k] / corr2_[si];
        model_.weights[k] -=
            lr_[si] * (mhat / (std::sqrt(vhat) + a.epsilon) + a.weight_decay * model_.weights[k]);
    }

    TrainedModel& model_;
    const TrainConfig& config_;
    std::size_t dim_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::vector<long> last_;
    std::array<double, kNumCategories> bm_{};
    std::array<double, kNumCategories> bv_{};
    std::vector<double> lr_;
    std::vector<double> corr1_;  // 1 - beta1^(s+1)
    std::vector<double> corr2_;  // 1 - beta2^(s+1)
};

std::vector<Example> build_examples(const std::vector<CorpusRecord>& corpus,
                                    const LabelTable& labels, const EncoderParams& encoder) {
    if (labels.scheme != LabelScheme::Binary)
        raise(ErrorKind::SchemeMismatch, "training labels must be binary");
    std::unordered_map<std::string_view, const CorpusRecord*> by_id;
    for (const CorpusRecord& r : corpus) by_id.emplace(r.report.study_id, &r);

    std::vector<Example> examples;
    examples.reserve(labels.rows.size());
    for (const LabelVector& row : labels.rows) {
        auto it = by_id.find(row.study_id);
        if (it == by_id.end())
            raise(ErrorKind::MissingText, "label for unknown study '" + row.study_id + "'");
        Example ex;
        ex.features = encode(section_text(*it->second, row.section), encoder);
        ex.targets = row.values;
        examples.push_back(std::move(ex));
    }
    return examples;
}

}  // namespace

void TrainConfig::validate() const {
    if (steps <= 0) raise(ErrorKind::Config, "steps must be > 0");
    if (learning_rate <= 0) raise(ErrorKind::Config, "learning_rate must be > 0");
    if (batch_size < 1) raise(ErrorKind::Config, "batch_size must be >= 1");
    if (lr_halving_interval <= 0) raise(ErrorKind::Config, "lr_halving_interval must be > 0");
    if (max_tokens <= 0) raise(ErrorKind::Config, "max_tokens must be > 0");
    if (threshold < 0 || threshold > 1) raise(ErrorKind::Config, "threshold must be in [0, 1]");
    if (log_every <= 0) raise(ErrorKind::Config, "log_every must be > 0");
}

double lr_at_step(const TrainConfig& config, long step) {
    long halvings = step / config.lr_halving_interval;
    return config.learning_rate * std::pow(2.0, -static_cast<double>(halvings));
}

double bce_loss(std::span<const double> logits, std::span<const std::uint8_t> targets) {
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        // -[t log s(z) + (1-t) log(1-s(z))] == softplus(z) - z t
        sum += softplus(logits[c]) - logits[c] * static_cast<double>(targets[c]);
    }
    return sum / static_cast<double>(logits.size());
}

void bce_loss_gradient(std::span<const double> logits, std::span<const std::uint8_t> targets,
                       std::span<double> grad_out) {
    double n = static_cast<double>(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) {
        grad_out[c] = (sigmoid(logits[c]) - static_cast<double>(targets[c])) / n;
    }
}

namespace {

void forward_logits(const TrainedModel& model, const EncodedExample& ex,
                    std::span<double> logits) {
    for (int c = 0; c < kNumCategories; ++c)
        logits[static_cast<std::size_t>(c)] = model.bias[static_cast<std::size_t>(c)];
    for (const auto& [j, x] : ex.features) {
        for (int c = 0; c < kNumCategories; ++c)
            logits[static_cast<std::size_t>(c)] += model.at(j, c) * static_cast<double>(x);
    }
}

}  // namespace

double batch_objective(const TrainedModel& model, std::span<const EncodedExample> batch) {
    double sum = 0.0;
    std::vector<double> logits(kNumCategories);
    for (const EncodedExample& ex : batch) {
        forward_logits(model, ex, logits);
        sum += bce_loss(logits, ex.targets);
    }
    return sum / static_cast<double>(batch.size());
}

void batch_gradient(const TrainedModel& model, std::span<const EncodedExample> batch,
                    std::vector<double>& grad_weights,
                    std::array<double, kNumCategories>& grad_bias) {
    grad_weights.assign(model.weights.size(), 0.0);
    grad_bias.fill(0.0);
    std::vector<double> logits(kNumCategories);
    std::array<double, kNumCategories> g{};
    for (const EncodedExample& ex : batch) {
        forward_logits(model, ex, logits);
        bce_loss_gradient(logits, ex.targets, g);
        for (const auto& [j, x] : ex.features) {
            for (int c = 0; c < kNumCategories; ++c)
                grad_weights[j * kNumCategories + static_cast<std::size_t>(c)] +=
                    g[static_cast<std::size_t>(c)] * static_cast<double>(x);
        }
        for (int c = 0; c < kNumCategories; ++c)
            grad_bias[static_cast<std::size_t>(c)] += g[static_cast<std::size_t>(c)];
    }
    double inv = 1.0 / static_cast<double>(batch.size());
    for (double& w : grad_weights) w *= inv;
    for (double& b : grad_bias) b *= inv;
}

TrainResult train(const std::vector<CorpusRecord>& corpus, const LabelTable& labels,
                  const TrainConfig& config) {
    config.validate();
    EncoderParams encoder = config.encoder;
    encoder.max_tokens = config.max_tokens;

    std::vector<Example> examples = build_examples(corpus, labels, encoder);
    if (examples.empty()) raise(ErrorKind::Config, "no training examples");

    TrainedModel model;
    if (config.warm_start) {
        model = load_model(*config.warm_start);
        if (!(model.header.encoder == encoder))
            raise(ErrorKind::ModelFormat,
                  "warm-start model encoder parameters do not match the training config");
    } else {
        model = make_zero_model(encoder);
    }

    {
        std::string summary =
            "steps=" + std::to_string(config.steps) + ";lr=" + std::to_string(config.learning_rate) +
            ";batch=" + std::to_string(config.batch_size) + ";seed=" + std::to_string(config.seed) +
            ";n=" + std::to_string(examples.size()) +
            ";warm=" + (config.warm_start ? config.warm_start->string() : "none");
        model.header.train_manifest_hash = sha256_hex(summary);
    }

    LazyAdamW optimizer(model, config);
    SplitMix64 rng(config.seed);
    std::vector<std::uint32_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
    shuffle_indices(order, rng);
    std::size_t cursor = 0;

    TrainResult result;
    std::vector<double> logits(kNumCategories);
    std::array<double, kNumCategories> example_grad{};

    for (long step = 0; step < config.steps; ++step) {
        std::vector<std::uint32_t> batch;
        batch.reserve(static_cast<std::size_t>(config.batch_size));
        for (int b = 0; b < config.batch_size; ++b) {
            if (cursor == order.size()) {
                shuffle_indices(order, rng);
                cursor = 0;
            }
            batch.push_back(order[cursor++]);
        }

        // Catch active features up before the forward pass so logits reflect
        // every prior step, exactly as a dense loop would.
        std::map<std::uint32_t, std::array<double, kNumCategories>> grads;
        for (std::uint32_t i : batch) {
            for (const auto& [j, x] : examples[i].features) grads.try_emplace(j);
        }
        for (const auto& [j, g] : grads) optimizer.catch_up(j, step);

        double batch_loss = 0.0;
        std::array<double, kNumCategories> bias_grad{};
        for (std::uint32_t i : batch) {
            const Example& ex = examples[i];
            forward_logits(model, ex, logits);
            batch_loss += bce_loss(logits, ex.targets);
            bce_loss_gradient(logits, ex.targets, example_grad);
            for (const auto& [j, x] : ex.features) {
                auto& g = grads[j];
                for (int c = 0; c < kNumCategories; ++c)
                    g[static_cast<std::size_t>(c)] +=
                        example_grad[static_cast<std::size_t>(c)] * static_cast<double>(x);
            }
            for (int c = 0; c < kNumCategories; ++c)
                bias_grad[static_cast<std::size_t>(c)] += example_grad[static_cast<std::size_t>(c)];
        }

        double inv_batch = 1.0 / static_cast<double>(config.batch_size);
        batch_loss *= inv_batch;
        for (auto& [j, g] : grads) {
            for (double& gc : g) gc *= inv_batch;
            optimizer.apply(j, step, g);
        }
        for (double& gc : bias_grad) gc *= inv_batch;
        optimizer.apply_bias(step, bias_grad);

        if (step % config.log_every == 0 || step + 1 == config.steps) {
            result.log.push_back(TrainLogEntry{step, lr_at_step(config, step), batch_loss});
        }
    }

    optimizer.finish();
    result.model = std::move(model);
    return result;
}

void write_train_log_jsonl(std::ostream& out, const std::vector<TrainLogEntry>& log) {
    for (const TrainLogEntry& entry : log) {
        nlohmann::ordered_json j;
        j["step"] = entry.step;
        j["lr"] = entry.lr;
        j["loss"] = entry.loss;
        out << j.dump() << '\n';
    }
}

std::map<SectionChoice, std::vector<CurvePoint>> learning_curve(
    const std::vector<CorpusRecord>& corpus, const LabelTable& pseudo_labels,
    std::span<const std::size_t> sizes, const LabelTable& gold, const TrainConfig& config) {
    config.validate();
    if (gold.scheme != LabelScheme::Binary)
        raise(ErrorKind::SchemeMismatch, "gold labels must be binary");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (i > 0 && sizes[i] < sizes[i - 1])
            raise(ErrorKind::Config, "sizes must be sorted ascending");
        if (sizes[i] == 0 || sizes[i] > pseudo_labels.rows.size())
            raise(ErrorKind::Config,
                  "size " + std::to_string(sizes[i]) + " exceeds the labeled corpus");
    }

    std::unordered_map<std::string_view, const CorpusRecord*> by_id;
    for (const CorpusRecord& r : corpus) by_id.emplace(r.report.study_id, &r);

    // Nested seed-deterministic subsets: one shuffle, prefix per size.
    std::vector<std::uint32_t> order(pseudo_labels.rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
    SplitMix64 rng(config.seed ^ 0xC0FFEE);
    shuffle_indices(order, rng);

    std::map<SectionChoice, std::vector<CurvePoint>> out;
    for (std::size_t size : sizes) {
        // subset membership is seed-deterministic; row order stays the
        // table's own, so the full-size point equals a direct training run
        std::vector<std::uint32_t> chosen(order.begin(), order.begin() + static_cast<long>(size));
        std::sort(chosen.begin(), chosen.end());
        LabelTable subset;
        subset.scheme = pseudo_labels.scheme;
        for (std::uint32_t i : chosen) subset.rows.push_back(pseudo_labels.rows[i]);

        TrainResult trained = train(corpus, subset, config);

        for (SectionChoice section : {SectionChoice::Findings, SectionChoice::Impression}) {
            LabelTable gold_section;
            gold_section.scheme = LabelScheme::Binary;
            for (const LabelVector& g : gold.rows) {
                if (g.section == section) gold_section.rows.push_back(g);
            }
            if (gold_section.rows.empty()) continue;

            LabelTable pred;
            pred.scheme = LabelScheme::Binary;
            for (const LabelVector& g : gold_section.rows) {
                auto it = by_id.find(g.study_id);
                if (it == by_id.end())
                    raise(ErrorKind::MissingText, "gold study '" + g.study_id + "' not in corpus");
                pred.rows.push_back(predict(trained.model, section_text(*it->second, section),
                                            config.threshold, g.study_id, section)
                                        .label);
            }
            MetricsReport report = evaluate(pred, gold_section, section, all_categories(),
                                            UncertainPolicy::MergeUncertainAsPositive);
            out[section].push_back(CurvePoint{size, report.macro.f1});
        }
    }
    return out;
}

}  // namespace chexlab
