#include "chexlab/synthetic.hpp"

#include <array>
#include <string>

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
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Decorated surface phrases per category, all of which the shipped lexicon
// maps back to exactly that category. Asserted sentences use these long
// forms; negated and hedged sentences use the bare core term, so the two
// sentence kinds share almost no word grams beyond the core itself.
const std::array<std::vector<const char*>, kNumCategories> kPhrases = {{
    {"mild bibasilar subsegmental atelectasis", "linear platelike discoid atelectasis"},
    {"focal lobar airspace consolidation", "patchy multifocal confluent consolidation"},
    {"small layering dependent pleural effusion", "moderate freely flowing pleural effusion"},
    {"acute displaced posterolateral rib fracture", "healed comminuted clavicle fracture"},
    {"severe bullous centrilobular emphysema", "marked global hyperinflation of both lungs"},
    {"hazy ill defined retrocardiac opacity", "coarse reticular biapical fibrosis"},
    {"calcified solitary midlung granuloma", "rounded spiculated perihilar mass"},
    {"dense nodose calcific pleural thickening", "chronic smooth blunting of the costophrenic angle"},
    {"trace apical visceral pneumothorax", "tiny loculated anteromedial pneumothorax"},
    {"diffuse florid interstitial pulmonary edema", "increased engorged pulmonary vascular congestion"},
    {"extensive crepitant chest wall subcutaneous emphysema", "palpable subcutaneous emphysema of the neck"},
    {"large volume curvilinear pneumoperitoneum", "crescentic lucent free gas under the diaphragm"},
    {"progressive globular cardiomegaly", "conspicuous widening of the superior mediastinum"},
}};

// Short core terms for negation and hedging; each still maps to exactly its
// category through the lexicon.
const std::array<const char*, kNumCategories> kCores = {{
    "atelectasis",
    "consolidation",
    "effusion",
    "fracture",
    "hyperinflation",
    "opacity",
    "nodule",
    "pleural thickening",
    "pneumothorax",
    "edema",
    "subcutaneous emphysema",
    "pneumoperitoneum",
    "cardiomegaly",
}};

const std::vector<const char*> kPositiveTemplates = {
    "There is %.", "% is seen.", "% persists.",
};

const std::vector<const char*> kNegativeTemplates = {
    "No %.", "No evidence of %.", "Resolved %.",
};

const std::vector<const char*> kUncertainTemplates = {
    "% cannot be excluded.", "Possible %.",
};

const std::vector<const char*> kFillers = {
    "The lungs are clear.", "No acute cardiopulmonary process.", "Heart size is normal.",
    "Unremarkable chest radiograph.", "Lines and tubes in standard position.",
    "Degenerative changes of the thoracic spine.", "The visualized osseous structures are intact.",
};

std::string fill(const char* tpl, const std::string& phrase) {
    std::string out;
    for (const char* p = tpl; *p; ++p) {
        if (*p == '%') {
            out += phrase;
        } else {
            out += *p;
        }
    }
    return out;
}

std::string sentence(SplitMix64& rng, const SyntheticOptions& opt) {
    double total = opt.positive_weight + opt.negative_weight + opt.uncertain_weight +
                   opt.filler_weight;
    double roll = rng.uniform() * total;
    if (roll < opt.filler_weight) return kFillers[rng.bounded(kFillers.size())];
    roll -= opt.filler_weight;

    std::size_t category = rng.bounded(kPhrases.size());
    const auto& phrases = kPhrases[category];
    if (roll < opt.positive_weight) {
        return fill(kPositiveTemplates[rng.bounded(kPositiveTemplates.size())],
                    phrases[rng.bounded(phrases.size())]);
    }
    roll -= opt.positive_weight;
    // negations use the bare core term; hedges keep the full phrase since a
    // hedged finding still labels positive
    if (roll < opt.negative_weight)
        return fill(kNegativeTemplates[rng.bounded(kNegativeTemplates.size())], kCores[category]);
    return fill(kUncertainTemplates[rng.bounded(kUncertainTemplates.size())],
                phrases[rng.bounded(phrases.size())]);
}

std::string paragraph(SplitMix64& rng, const SyntheticOptions& opt, int min_s, int max_s) {
    int n = min_s + static_cast<int>(rng.bounded(static_cast<std::size_t>(max_s - min_s + 1)));
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i > 0) out += ' ';
        out += sentence(rng, opt);
    }
    return out;
}

}  // namespace

std::vector<CorpusRecord> generate_synthetic_corpus(const SyntheticOptions& options) {
    SplitMix64 rng(options.seed);
    std::vector<CorpusRecord> records;
    records.reserve(options.count);
    for (std::size_t i = 0; i < options.count; ++i) {
        RadiologyReport report;
        report.study_id = options.id_prefix + std::to_string(1000000 + i);
        report.findings = paragraph(rng, options, options.min_findings_sentences,
                                    options.max_findings_sentences);
        report.impression = paragraph(rng, options, options.min_impression_sentences,
                                      options.max_impression_sentences);
        report.raw = "FINDINGS: " + *report.findings + " IMPRESSION: " + *report.impression;
        records.push_back(make_corpus_record(std::move(report)));
    }
    return records;
}

}  // namespace chexlab
