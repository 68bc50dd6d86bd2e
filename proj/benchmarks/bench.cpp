#include <benchmark/benchmark.h>

#include <random>

#include "chexlab/encoder.hpp"
#include "chexlab/lexicon.hpp"
#include "chexlab/mapper.hpp"
#include "chexlab/metrics.hpp"
#include "chexlab/model.hpp"
#include "chexlab/synthetic.hpp"
#include "chexlab/text.hpp"

namespace {

using namespace chexlab;

const std::string kReport =
    "FINDINGS:  There is a small right  pleural effusion with adjacent bibasilar atelectasis.\n"
    "No pneumothorax. Persistent biapical fibrosis without superimposed acute consolidation.\n"
    "A calcified granuloma projects over the right lateral mid lung.\n"
    "IMPRESSION:  Small right pleural effusion. No acute consolidation.";

void BM_NormalizeText(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(normalize_text(kReport));
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(kReport.size()));
}
BENCHMARK(BM_NormalizeText);

void BM_Tokenize(benchmark::State& state) {
    std::string text = normalize_text(kReport);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tokenize(text));
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_Tokenize);

void BM_RuleLabel(benchmark::State& state) {
    const MappingLexicon& lex = default_lexicon();
    std::string text = normalize_text(kReport);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rule_label(text, lex, "bench", SectionChoice::Findings));
    }
}
BENCHMARK(BM_RuleLabel);

void BM_MapPhrase(benchmark::State& state) {
    const MappingLexicon& lex = default_lexicon();
    for (auto _ : state) {
        benchmark::DoNotOptimize(map_phrase("blunting of the right costophrenic angle", lex));
    }
}
BENCHMARK(BM_MapPhrase);

void BM_Encode(benchmark::State& state) {
    EncoderParams params;
    auto corpus = generate_synthetic_corpus(SyntheticOptions{.seed = 1, .count = 64});
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(encode(corpus[i % corpus.size()].selected_text, params));
        ++i;
    }
}
BENCHMARK(BM_Encode);

void BM_Predict(benchmark::State& state) {
    EncoderParams params;
    TrainedModel model = make_zero_model(params);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    for (double& w : model.weights) w = dist(rng);
    auto corpus = generate_synthetic_corpus(SyntheticOptions{.seed = 2, .count = 64});
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(predict(model, corpus[i % corpus.size()].selected_text, 0.5));
        ++i;
    }
}
BENCHMARK(BM_Predict);

void BM_Evaluate(benchmark::State& state) {
    const MappingLexicon& lex = default_lexicon();
    auto corpus = generate_synthetic_corpus(SyntheticOptions{.seed = 4, .count = 500});
    LabelTable gold;
    gold.scheme = LabelScheme::Binary;
    for (const CorpusRecord& r : corpus)
        gold.rows.push_back(rule_label(r.selected_text, lex, r.report.study_id,
                                       r.selected_section));
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(gold, gold, SectionChoice::Findings, all_categories(),
                                          UncertainPolicy::MergeUncertainAsPositive));
    }
}
BENCHMARK(BM_Evaluate);

}  // namespace

BENCHMARK_MAIN();
