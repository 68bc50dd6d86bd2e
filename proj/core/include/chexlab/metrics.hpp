#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chexlab/taxonomy.hpp"

namespace chexlab {

struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;

    long total() const { return tp + fp + fn + tn; }
    bool operator==(const ConfusionCounts&) const = default;
};

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Degenerate-count rules are total and explicit: P := 1 when TP+FP = 0,
// R := 1 when TP+FN = 0, F1 := 1 when TP = FP = FN = 0, else F1 := 0 when
// P+R = 0. Perfect agreement on an absent finding scores 1.0, matching how
// rare-category cells are reported.
Prf prf(const ConfusionCounts& counts);

enum class AggregateKind { Micro, Macro };

using CountsByCategory = std::array<ConfusionCounts, kNumCategories>;

// Macro: unweighted mean of per-category P/R/F1 over the subset.
// Micro: prf over the elementwise-summed counts of the subset.
Prf aggregate(const CountsByCategory& counts, std::span<const Category> subset,
              AggregateKind kind);

// The macro aggregation rule applied to bare per-category values (an
// unweighted arithmetic mean); what the aggregate() macro path reduces to.
double macro_average(std::span<const double> per_category_values);

struct CategoryMetrics {
    Category category;
    ConfusionCounts counts;
    Prf prf;
};

struct MetricsReport {
    SectionChoice section = SectionChoice::Findings;
    UncertainPolicy policy = UncertainPolicy::MergeUncertainAsPositive;
    int subset_size = kNumCategories;
    std::size_t n_studies = 0;
    std::vector<CategoryMetrics> per_category;
    Prf micro;
    Prf macro;
};

// Joins prediction and gold rows of one section by study_id (the sets must
// match; mismatches are enumerated in the StudyMismatch error), converts
// four-status predictions through merge_uncertain under the given policy,
// and computes the full report. Gold must be binary.
MetricsReport evaluate(const LabelTable& pred, const LabelTable& gold, SectionChoice section,
                       std::span<const Category> subset, UncertainPolicy policy);

struct DistributionRow {
    Category category;
    std::size_t count = 0;
    double percent = 0.0;  // count / n_studies * 100
};

struct Distribution {
    SectionChoice section = SectionChoice::Findings;
    std::size_t n_studies = 0;
    std::vector<DistributionRow> rows;  // all 13, canonical order
    std::size_t no_abnormality_count = 0;
    double no_abnormality_percent = 0.0;
};

// Positive counts per category over the binary rows of one section, plus the
// all-negative row. Zero studies yield zero counts with percentages omitted
// (rendered as "-").
Distribution distribution(const LabelTable& labels, SectionChoice section);

struct CrossTab {
    std::size_t n_studies = 0;
    std::array<std::array<long, 4>, 4> counts{};       // [status of a][status of b]
    std::array<std::array<double, 4>, 4> row_percent{};  // cell / row sum * 100
};

// Cell (i, j) counts (study, category) pairs with a = status_i, b = status_j,
// per section. Both tables must be four-status with equal study sets.
std::map<SectionChoice, CrossTab> cross_tab(const LabelTable& a, const LabelTable& b);

// Half-up decimal rounding used by all renderers; internal math stays full
// precision.
double round_half_up(double value, int digits);

std::string render_metrics_report(const MetricsReport& report);
void write_metrics_jsonl(std::ostream& out, const MetricsReport& report);
std::string render_distribution(const Distribution& dist);
void write_distribution_jsonl(std::ostream& out, const Distribution& dist);
std::string render_cross_tab(const CrossTab& tab, SectionChoice section);
void write_cross_tab_jsonl(std::ostream& out, const CrossTab& tab, SectionChoice section);

}  // namespace chexlab
