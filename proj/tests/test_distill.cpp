#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "chexlab/encoder.hpp"
#include "chexlab/error.hpp"
#include "chexlab/lexicon.hpp"
#include "chexlab/mapper.hpp"
#include "chexlab/metrics.hpp"
#include "chexlab/model.hpp"
#include "chexlab/synthetic.hpp"
#include "chexlab/trainer.hpp"

using namespace chexlab;
namespace fs = std::filesystem;

namespace {

CorpusRecord record_for(std::string id, std::string text) {
    RadiologyReport r;
    r.study_id = std::move(id);
    r.impression = std::move(text);
    return make_corpus_record(std::move(r));
}

LabelVector binary_row(std::string id, std::initializer_list<Category> positives) {
    LabelVector v = LabelVector::binary(std::move(id), SectionChoice::Impression);
    for (Category c : positives) v.set(c, PresenceLabel::Positive);
    return v;
}

std::string serialize(const TrainedModel& model) {
    std::ostringstream out(std::ios::binary);
    save_model(out, model);
    return out.str();
}

}  // namespace

TEST_CASE("encode: determinism, emptiness, truncation") {
    EncoderParams params;
    params.feature_bits = 12;
    CHECK(encode("", params).empty());
    CHECK(encode("pleural effusion", params) == encode("pleural effusion", params));
    CHECK(encode("Pleural, EFFUSION!", params) == encode("pleural effusion", params));

    // identical prefixes, differences only beyond the truncation point
    params.max_tokens = 512;
    std::string base;
    for (int i = 0; i < 512; ++i) base += "tok" + std::to_string(i % 37) + " ";
    std::string a = base + "completely different tail text";
    std::string b = base + "nothing shared here at all";
    CHECK(encode(a, params) == encode(b, params));

    // counts accumulate
    auto v = encode("effusion effusion effusion", params);
    bool found3 = false;
    for (auto& [idx, count] : v) {
        if (count == 3.0f) found3 = true;
    }
    CHECK(found3);
}

TEST_CASE("encode respects the feature space bound") {
    EncoderParams params;
    params.feature_bits = 8;
    auto v = encode("a b c d e f g h i j k l m n o p q r s t u v w x y z", params);
    for (auto& [idx, count] : v) CHECK(idx < params.dim());
}

TEST_CASE("bce_loss closed-form values") {
    std::vector<double> zeros(13, 0.0);
    std::array<std::uint8_t, 13> targets{};
    CHECK(bce_loss(zeros, targets) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    targets.fill(1);
    CHECK(bce_loss(zeros, targets) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // one confident correct term: softplus(-20), from an independent
    // long-double evaluation of the naive formula
    std::vector<double> logits(13, 0.0);
    logits[0] = 20.0;
    std::array<std::uint8_t, 13> t1{};
    t1[0] = 1;
    long double sig = 1.0L / (1.0L + std::exp(-20.0L));
    long double naive_term = -std::log(sig);
    double expected = (static_cast<double>(naive_term) + 12.0 * std::log(2.0)) / 13.0;
    CHECK(bce_loss(logits, t1) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(static_cast<double>(naive_term) == doctest::Approx(2.061153622438558e-9).epsilon(1e-6));
}

TEST_CASE("bce gradient matches finite differences of bce_loss") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> logit_dist(-4.0, 4.0);
    std::bernoulli_distribution bit(0.5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> logits(13);
        std::array<std::uint8_t, 13> targets{};
        for (int c = 0; c < 13; ++c) {
            logits[static_cast<std::size_t>(c)] = logit_dist(rng);
            targets[static_cast<std::size_t>(c)] = bit(rng) ? 1 : 0;
        }
        std::array<double, 13> grad{};
        bce_loss_gradient(logits, targets, grad);
        for (int c = 0; c < 13; ++c) {
            double h = 1e-6;
            std::vector<double> up = logits;
            std::vector<double> down = logits;
            up[static_cast<std::size_t>(c)] += h;
            down[static_cast<std::size_t>(c)] -= h;
            double fd = (bce_loss(up, targets) - bce_loss(down, targets)) / (2 * h);
            double denom = std::max(std::abs(fd), 1e-9);
            CHECK(std::abs(grad[static_cast<std::size_t>(c)] - fd) / denom < 1e-6);
        }
    }
}

TEST_CASE("full-objective gradient matches central finite differences") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> weight_dist(-0.5, 0.5);
    std::bernoulli_distribution bit(0.4);
    EncoderParams params;
    params.feature_bits = 6;

    for (int trial = 0; trial < 20; ++trial) {
        TrainedModel model = make_zero_model(params);
        for (double& w : model.weights) w = weight_dist(rng);
        for (double& b : model.bias) b = weight_dist(rng);

        std::vector<EncodedExample> batch;
        const char* texts[] = {"pleural effusion seen", "no acute process today",
                               "granuloma and opacity", "rib fracture with deformity"};
        for (const char* text : texts) {
            EncodedExample ex;
            ex.features = encode(text, params);
            for (int c = 0; c < 13; ++c) ex.targets[static_cast<std::size_t>(c)] = bit(rng) ? 1 : 0;
            batch.push_back(std::move(ex));
        }

        std::vector<double> grad_w;
        std::array<double, 13> grad_b{};
        batch_gradient(model, batch, grad_w, grad_b);

        std::uniform_int_distribution<std::size_t> pick(0, model.weights.size() - 1);
        double h = 1e-6;
        for (int probe = 0; probe < 25; ++probe) {
            std::size_t k = pick(rng);
            TrainedModel up = model;
            TrainedModel down = model;
            up.weights[k] += h;
            down.weights[k] -= h;
            double fd = (batch_objective(up, batch) - batch_objective(down, batch)) / (2 * h);
            double denom = std::max({std::abs(fd), std::abs(grad_w[k]), 1e-8});
            CHECK(std::abs(grad_w[k] - fd) / denom < 1e-4);
        }
        for (int c = 0; c < 13; ++c) {
            TrainedModel up = model;
            TrainedModel down = model;
            up.bias[static_cast<std::size_t>(c)] += h;
            down.bias[static_cast<std::size_t>(c)] -= h;
            double fd = (batch_objective(up, batch) - batch_objective(down, batch)) / (2 * h);
            double denom = std::max({std::abs(fd), std::abs(grad_b[static_cast<std::size_t>(c)]), 1e-8});
            CHECK(std::abs(grad_b[static_cast<std::size_t>(c)] - fd) / denom < 1e-4);
        }
    }
}

TEST_CASE("learning-rate schedule halves every interval") {
    TrainConfig config;
    CHECK(lr_at_step(config, 0) == doctest::Approx(5e-5));
    CHECK(lr_at_step(config, 3999) == doctest::Approx(5e-5));
    CHECK(lr_at_step(config, 4000) == doctest::Approx(2.5e-5));
    CHECK(lr_at_step(config, 8000) == doctest::Approx(1.25e-5));
    CHECK(lr_at_step(config, 9999) == doctest::Approx(1.25e-5));
}

TEST_CASE("train config validation") {
    TrainConfig config;
    config.steps = 0;
    CHECK_THROWS_AS(config.validate(), Error);
    config = TrainConfig{};
    config.learning_rate = -1;
    CHECK_THROWS_AS(config.validate(), Error);
    config = TrainConfig{};
    config.batch_size = 0;
    CHECK_THROWS_AS(config.validate(), Error);
}

TEST_CASE("separable two-report fixture converges and predicts its labels") {
    std::vector<CorpusRecord> corpus = {
        record_for("pos", "Large pleural effusion."),
        record_for("neg", "The lungs are clear."),
    };
    LabelTable labels;
    labels.scheme = LabelScheme::Binary;
    labels.rows.push_back(binary_row("pos", {Category::Effusion}));
    labels.rows.push_back(binary_row("neg", {}));

    TrainConfig config;
    config.steps = 500;
    config.learning_rate = 0.05;  // toy-scale schedule
    config.batch_size = 2;
    config.seed = 42;
    config.encoder.feature_bits = 10;
    TrainResult result = train(corpus, labels, config);

    CHECK(result.log.back().loss < 0.01);
    Prediction pos = predict(result.model, "Large pleural effusion.", 0.5);
    Prediction neg = predict(result.model, "The lungs are clear.", 0.5);
    CHECK(pos.label.presence(Category::Effusion) == PresenceLabel::Positive);
    CHECK(neg.label.presence(Category::Effusion) == PresenceLabel::NotPositive);
    for (Category c : all_categories()) {
        if (c != Category::Effusion) CHECK(pos.label.presence(c) == PresenceLabel::NotPositive);
    }
}

TEST_CASE("same seed trains to bitwise-identical weights; different seed differs") {
    auto corpus = generate_synthetic_corpus(SyntheticOptions{.seed = 21, .count = 60});
    LabelTable labels;
    labels.scheme = LabelScheme::Binary;
    for (const CorpusRecord& r : corpus) {
        LabelVector v = LabelVector::binary(r.report.study_id, r.selected_section);
        if (r.selected_text.find("effusion") != std::string::npos)
            v.set(Category::Effusion, PresenceLabel::Positive);
        labels.rows.push_back(std::move(v));
    }

    TrainConfig config;
    config.steps = 120;
    config.batch_size = 8;
    config.seed = 7;
    config.encoder.feature_bits = 12;
    TrainResult a = train(corpus, labels, config);
    TrainResult b = train(corpus, labels, config);
    CHECK(serialize(a.model) == serialize(b.model));

    config.seed = 8;
    TrainResult c = train(corpus, labels, config);
    CHECK(serialize(c.model) != serialize(a.model));
}

TEST_CASE("training loss is non-increasing over one small full-batch step") {
    std::vector<CorpusRecord> corpus = {
        record_for("a", "Pleural effusion and atelectasis."),
        record_for("b", "Granuloma in the left lung."),
        record_for("c", "No acute process."),
    };
    LabelTable labels;
    labels.scheme = LabelScheme::Binary;
    labels.rows.push_back(binary_row("a", {Category::Effusion, Category::Atelectasis}));
    labels.rows.push_back(binary_row("b", {Category::Nodule}));
    labels.rows.push_back(binary_row("c", {}));

    EncoderParams params;
    params.feature_bits = 10;
    std::vector<EncodedExample> batch;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        EncodedExample ex;
        ex.features = encode(corpus[i].selected_text, params);
        ex.targets = labels.rows[i].values;
        batch.push_back(std::move(ex));
    }

    TrainedModel model = make_zero_model(params);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(-0.3, 0.3);
    for (double& w : model.weights) w = dist(rng);

    double before = batch_objective(model, batch);
    std::vector<double> grad_w;
    std::array<double, 13> grad_b{};
    batch_gradient(model, batch, grad_w, grad_b);
    const double lr = 1e-3;
    TrainedModel stepped = model;
    for (std::size_t k = 0; k < stepped.weights.size(); ++k) stepped.weights[k] -= lr * grad_w[k];
    for (int c = 0; c < 13; ++c)
        stepped.bias[static_cast<std::size_t>(c)] -= lr * grad_b[static_cast<std::size_t>(c)];
    double after = batch_objective(stepped, batch);
    CHECK(after <= before);
}

TEST_CASE("model save/load round-trip preserves predictions bitwise") {
    auto corpus = generate_synthetic_corpus(SyntheticOptions{.seed = 31, .count = 40});
    LabelTable labels;
    labels.scheme = LabelScheme::Binary;
    for (const CorpusRecord& r : corpus)
        labels.rows.push_back(binary_row(r.report.study_id, {Category::LungOpacity}));

    TrainConfig config;
    config.steps = 60;
    config.batch_size = 8;
    config.encoder.feature_bits = 12;
    TrainResult result = train(corpus, labels, config);

    fs::path path = fs::temp_directory_path() / "chexlab_model_roundtrip.bin";
    save_model(path, result.model);
    TrainedModel loaded = load_model(path);
    CHECK(loaded.header == result.model.header);

    for (const CorpusRecord& r : corpus) {
        Prediction a = predict(result.model, r.selected_text, 0.5);
        Prediction b = predict(loaded, r.selected_text, 0.5);
        for (int c = 0; c < 13; ++c)
            CHECK(a.probabilities[static_cast<std::size_t>(c)] ==
                  b.probabilities[static_cast<std::size_t>(c)]);
        CHECK(a.label == b.label);
    }
    fs::remove(path);
}

TEST_CASE("model loader rejects corrupt containers") {
    std::istringstream not_model("HELLO this is not a model");
    CHECK_THROWS_AS(load_model(not_model), Error);

    TrainedModel model = make_zero_model(EncoderParams{.feature_bits = 8});
    std::string bytes = serialize(model);
    bytes.resize(bytes.size() / 2);  // truncate the weight block
    std::istringstream truncated(bytes);
    try {
        load_model(truncated);
        FAIL("expected ModelFormat");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ModelFormat);
    }
}

TEST_CASE("zero model predicts 0.5 everywhere and labels nothing at threshold 0.5") {
    TrainedModel model = make_zero_model(EncoderParams{.feature_bits = 8});
    Prediction p = predict(model, "pleural effusion", 0.5);
    for (double prob : p.probabilities) CHECK(prob == doctest::Approx(0.5));
    CHECK(no_abnormality(p.label));  // 0.5 is not > 0.5
}

TEST_CASE("prediction is invariant to surrounding whitespace") {
    TrainedModel model = make_zero_model(EncoderParams{.feature_bits = 8});
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> dist(-0.2, 0.2);
    for (double& w : model.weights) w = dist(rng);
    Prediction a = predict(model, "pleural effusion seen", 0.5);
    Prediction b = predict(model, "  pleural effusion seen \n", 0.5);
    for (int c = 0; c < 13; ++c)
        CHECK(a.probabilities[static_cast<std::size_t>(c)] ==
              b.probabilities[static_cast<std::size_t>(c)]);
}

TEST_CASE("train rejects missing corpus text and four-status labels") {
    std::vector<CorpusRecord> corpus = {record_for("known", "Clear lungs.")};
    LabelTable labels;
    labels.scheme = LabelScheme::Binary;
    labels.rows.push_back(binary_row("unknown", {}));
    TrainConfig config;
    config.steps = 1;
    config.encoder.feature_bits = 8;
    try {
        train(corpus, labels, config);
        FAIL("expected MissingText");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MissingText);
    }

    LabelTable four;
    four.scheme = LabelScheme::FourStatus;
    four.rows.push_back(LabelVector::four_status("known", SectionChoice::Impression));
    try {
        train(corpus, four, config);
        FAIL("expected SchemeMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SchemeMismatch);
    }
}

TEST_CASE("warm start reaches the loss target in fewer steps than cold start") {
    auto corpus = generate_synthetic_corpus(SyntheticOptions{.seed = 77, .count = 150});
    LabelTable labels;
    labels.scheme = LabelScheme::Binary;
    for (const CorpusRecord& r : corpus) {
        LabelVector v = LabelVector::binary(r.report.study_id, r.selected_section);
        if (r.selected_text.find("effusion") != std::string::npos)
            v.set(Category::Effusion, PresenceLabel::Positive);
        if (r.selected_text.find("opacit") != std::string::npos)
            v.set(Category::LungOpacity, PresenceLabel::Positive);
        labels.rows.push_back(std::move(v));
    }

    TrainConfig config;
    config.steps = 400;
    config.learning_rate = 0.02;
    config.batch_size = 16;
    config.seed = 11;
    config.encoder.feature_bits = 12;
    config.log_every = 10;

    TrainResult cold = train(corpus, labels, config);
    fs::path warm_path = fs::temp_directory_path() / "chexlab_warm.bin";
    save_model(warm_path, cold.model);

    TrainConfig warm_config = config;
    warm_config.warm_start = warm_path;
    TrainResult warm = train(corpus, labels, warm_config);

    const double target = 0.10;
    auto steps_to_target = [&](const TrainResult& r) {
        for (const TrainLogEntry& e : r.log) {
            if (e.loss <= target) return e.step;
        }
        return r.log.back().step + 1;
    };
    CHECK(steps_to_target(warm) < steps_to_target(cold));
    fs::remove(warm_path);
}

TEST_CASE("learning_curve: full-size point equals a direct train+eval run") {
    auto corpus = generate_synthetic_corpus(SyntheticOptions{.seed = 13, .count = 120});
    const MappingLexicon& lex = default_lexicon();

    LabelTable labels;
    labels.scheme = LabelScheme::Binary;
    for (std::size_t i = 0; i < 100; ++i) {
        const CorpusRecord& r = corpus[i];
        labels.rows.push_back(rule_label(r.selected_text, lex, r.report.study_id,
                                         r.selected_section));
    }
    LabelTable gold;
    gold.scheme = LabelScheme::Binary;
    for (std::size_t i = 100; i < 120; ++i) {
        const CorpusRecord& r = corpus[i];
        gold.rows.push_back(rule_label(section_text(r, SectionChoice::Findings), lex,
                                       r.report.study_id, SectionChoice::Findings));
    }

    TrainConfig config;
    config.steps = 150;
    config.learning_rate = 0.02;
    config.batch_size = 16;
    config.seed = 3;
    config.encoder.feature_bits = 12;

    std::vector<std::size_t> sizes = {50, 100};
    auto curves = learning_curve(corpus, labels, sizes, gold, config);
    REQUIRE(curves.count(SectionChoice::Findings) == 1);
    auto& points = curves[SectionChoice::Findings];
    REQUIRE(points.size() == 2);
    CHECK(points[0].train_size == 50);
    CHECK(points[1].train_size == 100);

    // the size-100 subset is the whole label table, so it must match a
    // direct train+eval run exactly
    TrainResult direct = train(corpus, labels, config);
    LabelTable pred;
    pred.scheme = LabelScheme::Binary;
    for (const LabelVector& g : gold.rows) {
        for (const CorpusRecord& r : corpus) {
            if (r.report.study_id == g.study_id) {
                pred.rows.push_back(predict(direct.model, section_text(r, SectionChoice::Findings),
                                            config.threshold, g.study_id, SectionChoice::Findings)
                                        .label);
                break;
            }
        }
    }
    MetricsReport report = evaluate(pred, gold, SectionChoice::Findings, all_categories(),
                                    UncertainPolicy::MergeUncertainAsPositive);
    CHECK(points[1].macro_f1 == doctest::Approx(report.macro.f1).epsilon(1e-12));

    CHECK_THROWS_AS(learning_curve(corpus, labels, std::vector<std::size_t>{200}, gold, config),
                    Error);
}
