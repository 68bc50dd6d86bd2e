#include "chexlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "chexlab/error.hpp"

namespace chexlab {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<const LabelVector*> section_rows(const LabelTable& table, SectionChoice section) {
    std::vector<const LabelVector*> rows;
    for (const LabelVector& v : table.rows) {
        if (v.section == section) rows.push_back(&v);
    }
    return rows;
}

std::string fixed2(double value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << round_half_up(value, 2);
    return out.str();
}

std::string fixed1(double value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << round_half_up(value, 1);
    return out.str();
}

constexpr std::array<std::string_view, 4> kStatusNames = {"positive", "negative", "uncertain",
                                                          "not_mentioned"};

}  // namespace

double round_half_up(double value, int digits) {
    double scale = std::pow(10.0, digits);
    return std::floor(value * scale + 0.5) / scale;
}

Prf prf(const ConfusionCounts& c) {
    Prf out;
    out.precision = (c.tp + c.fp == 0) ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    out.recall = (c.tp + c.fn == 0) ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (c.tp == 0 && c.fp == 0 && c.fn == 0) {
        out.f1 = 1.0;
    } else if (out.precision + out.recall == 0.0) {
        out.f1 = 0.0;
    } else {
        out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    }
    return out;
}

Prf aggregate(const CountsByCategory& counts, std::span<const Category> subset,
              AggregateKind kind) {
    if (subset.empty()) raise(ErrorKind::MissingCategory, "empty category subset");
    if (kind == AggregateKind::Micro) {
        ConfusionCounts sum;
        for (Category c : subset) {
            const ConfusionCounts& cc = counts[static_cast<std::size_t>(c)];
            sum.tp += cc.tp;
            sum.fp += cc.fp;
            sum.fn += cc.fn;
            sum.tn += cc.tn;
        }
        return prf(sum);
    }
    Prf mean;
    for (Category c : subset) {
        Prf p = prf(counts[static_cast<std::size_t>(c)]);
        mean.precision += p.precision;
        mean.recall += p.recall;
        mean.f1 += p.f1;
    }
    double n = static_cast<double>(subset.size());
    mean.precision /= n;
    mean.recall /= n;
    mean.f1 /= n;
    return mean;
}

double macro_average(std::span<const double> per_category_values) {
    if (per_category_values.empty())
        raise(ErrorKind::MissingCategory, "macro average over zero categories");
    double sum = 0.0;
    for (double v : per_category_values) sum += v;
    return sum / static_cast<double>(per_category_values.size());
}

MetricsReport evaluate(const LabelTable& pred, const LabelTable& gold, SectionChoice section,
                       std::span<const Category> subset, UncertainPolicy policy) {
    if (gold.scheme != LabelScheme::Binary)
        raise(ErrorKind::SchemeMismatch, "gold labels must be binary");

    std::unordered_map<std::string_view, const LabelVector*> pred_by_id;
    for (const LabelVector* v : section_rows(pred, section)) pred_by_id.emplace(v->study_id, v);
    auto gold_rows = section_rows(gold, section);

    std::set<std::string> missing;  // in gold, not in pred
    std::set<std::string> extra;    // in pred, not in gold
    std::set<std::string_view> gold_ids;
    for (const LabelVector* g : gold_rows) {
        gold_ids.insert(g->study_id);
        if (!pred_by_id.count(g->study_id)) missing.insert(g->study_id);
    }
    for (const auto& [id, v] : pred_by_id) {
        if (!gold_ids.count(id)) extra.insert(std::string(id));
    }
    if (!missing.empty() || !extra.empty()) {
        std::string detail;
        auto list = [&detail](const char* tag, const std::set<std::string>& ids) {
            if (ids.empty()) return;
            detail += tag;
            std::size_t shown = 0;
            for (const std::string& id : ids) {
                if (shown++ == 8) {
                    detail += " ...";
                    break;
                }
                detail += ' ';
                detail += id;
            }
        };
        list("missing predictions for:", missing);
        list(missing.empty() ? "unmatched predictions:" : "; unmatched predictions:", extra);
        raise(ErrorKind::StudyMismatch, detail);
    }

    MetricsReport report;
    report.section = section;
    report.policy = policy;
    report.subset_size = static_cast<int>(subset.size());
    report.n_studies = gold_rows.size();

    CountsByCategory counts{};
    for (const LabelVector* g : gold_rows) {
        const LabelVector* p = pred_by_id.at(g->study_id);
        LabelVector binary_pred =
            p->scheme == LabelScheme::FourStatus ? merge_uncertain(*p, policy) : *p;
        for (Category c : all_categories()) {
            bool truth = g->presence(c) == PresenceLabel::Positive;
            bool guess = binary_pred.presence(c) == PresenceLabel::Positive;
            ConfusionCounts& cc = counts[static_cast<std::size_t>(c)];
            if (truth && guess) ++cc.tp;
            if (!truth && guess) ++cc.fp;
            if (truth && !guess) ++cc.fn;
            if (!truth && !guess) ++cc.tn;
        }
    }

    for (Category c : subset) {
        const ConfusionCounts& cc = counts[static_cast<std::size_t>(c)];
        report.per_category.push_back(CategoryMetrics{c, cc, prf(cc)});
    }
    report.micro = aggregate(counts, subset, AggregateKind::Micro);
    report.macro = aggregate(counts, subset, AggregateKind::Macro);
    return report;
}

Distribution distribution(const LabelTable& labels, SectionChoice section) {
    if (labels.scheme != LabelScheme::Binary)
        raise(ErrorKind::SchemeMismatch, "distribution needs binary labels");
    auto rows = section_rows(labels, section);

    Distribution dist;
    dist.section = section;
    dist.n_studies = rows.size();
    for (Category c : all_categories()) {
        std::size_t count = 0;
        for (const LabelVector* v : rows) {
            if (v->presence(c) == PresenceLabel::Positive) ++count;
        }
        double pct = rows.empty() ? 0.0
                                  : 100.0 * static_cast<double>(count) / static_cast<double>(rows.size());
        dist.rows.push_back(DistributionRow{c, count, pct});
    }
    for (const LabelVector* v : rows) {
        if (no_abnormality(*v)) ++dist.no_abnormality_count;
    }
    dist.no_abnormality_percent =
        rows.empty() ? 0.0
                     : 100.0 * static_cast<double>(dist.no_abnormality_count) /
                           static_cast<double>(rows.size());
    return dist;
}

std::map<SectionChoice, CrossTab> cross_tab(const LabelTable& a, const LabelTable& b) {
    if (a.scheme != LabelScheme::FourStatus || b.scheme != LabelScheme::FourStatus)
        raise(ErrorKind::SchemeMismatch, "cross_tab needs two four-status tables");

    std::map<SectionChoice, CrossTab> out;
    for (SectionChoice section : {SectionChoice::Findings, SectionChoice::Impression}) {
        auto rows_a = section_rows(a, section);
        auto rows_b = section_rows(b, section);
        if (rows_a.empty() && rows_b.empty()) continue;

        std::unordered_map<std::string_view, const LabelVector*> b_by_id;
        for (const LabelVector* v : rows_b) b_by_id.emplace(v->study_id, v);
        if (rows_a.size() != rows_b.size())
            raise(ErrorKind::StudyMismatch, "study sets differ in " + std::string(section_key(section)));

        CrossTab tab;
        tab.n_studies = rows_a.size();
        for (const LabelVector* va : rows_a) {
            auto it = b_by_id.find(va->study_id);
            if (it == b_by_id.end())
                raise(ErrorKind::StudyMismatch,
                      "study '" + va->study_id + "' missing from the second table");
            for (Category c : all_categories()) {
                int i = static_cast<int>(va->status(c));
                int j = static_cast<int>(it->second->status(c));
                ++tab.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
        }
        for (std::size_t i = 0; i < 4; ++i) {
            long row_sum = 0;
            for (long cell : tab.counts[i]) row_sum += cell;
            for (std::size_t j = 0; j < 4; ++j) {
                tab.row_percent[i][j] =
                    row_sum == 0 ? 0.0
                                 : 100.0 * static_cast<double>(tab.counts[i][j]) /
                                       static_cast<double>(row_sum);
            }
        }
        out.emplace(section, tab);
    }
    return out;
}

std::string render_metrics_report(const MetricsReport& report) {
    std::ostringstream out;
    out << "section: " << section_key(report.section) << "  studies: " << report.n_studies
        << "  subset: " << report.subset_size << "  policy: "
        << (report.policy == UncertainPolicy::MergeUncertainAsPositive ? "merge" : "positive-only")
        << "\n";
    out << std::left << std::setw(32) << "category" << std::right << std::setw(8) << "P"
        << std::setw(8) << "R" << std::setw(8) << "F1" << "\n";
    for (const CategoryMetrics& m : report.per_category) {
        out << std::left << std::setw(32) << category_name(m.category) << std::right << std::setw(8)
            << fixed2(100.0 * m.prf.precision) << std::setw(8) << fixed2(100.0 * m.prf.recall)
            << std::setw(8) << fixed2(100.0 * m.prf.f1) << "\n";
    }
    auto aggregate_line = [&](const char* name, const Prf& p) {
        out << std::left << std::setw(32) << name << std::right << std::setw(8)
            << fixed2(100.0 * p.precision) << std::setw(8) << fixed2(100.0 * p.recall)
            << std::setw(8) << fixed2(100.0 * p.f1) << "\n";
    };
    std::string micro = "Micro-average (" + std::to_string(report.subset_size) + " categories)";
    std::string macro = "Macro-average (" + std::to_string(report.subset_size) + " categories)";
    aggregate_line(micro.c_str(), report.micro);
    aggregate_line(macro.c_str(), report.macro);
    return out.str();
}

void write_metrics_jsonl(std::ostream& out, const MetricsReport& report) {
    for (const CategoryMetrics& m : report.per_category) {
        ordered_json j;
        j["category"] = std::string(category_key(m.category));
        j["P"] = m.prf.precision;
        j["R"] = m.prf.recall;
        j["F1"] = m.prf.f1;
        j["tp"] = m.counts.tp;
        j["fp"] = m.counts.fp;
        j["fn"] = m.counts.fn;
        j["tn"] = m.counts.tn;
        out << j.dump() << '\n';
    }
    for (auto [kind, p] : {std::pair{"micro", report.micro}, std::pair{"macro", report.macro}}) {
        ordered_json j;
        j["kind"] = kind;
        j["subset"] = report.subset_size;
        j["P"] = p.precision;
        j["R"] = p.recall;
        j["F1"] = p.f1;
        out << j.dump() << '\n';
    }
}

std::string render_distribution(const Distribution& dist) {
    std::ostringstream out;
    out << "section: " << section_key(dist.section) << "  studies: " << dist.n_studies << "\n";
    out << std::left << std::setw(32) << "category" << std::right << std::setw(8) << "count"
        << std::setw(9) << "percent" << "\n";
    for (const DistributionRow& row : dist.rows) {
        out << std::left << std::setw(32) << category_name(row.category) << std::right
            << std::setw(8) << row.count << std::setw(9)
            << (dist.n_studies == 0 ? std::string("-") : fixed1(row.percent)) << "\n";
    }
    out << std::left << std::setw(32) << "No Abnormality" << std::right << std::setw(8)
        << dist.no_abnormality_count << std::setw(9)
        << (dist.n_studies == 0 ? std::string("-") : fixed1(dist.no_abnormality_percent)) << "\n";
    return out.str();
}

void write_distribution_jsonl(std::ostream& out, const Distribution& dist) {
    for (const DistributionRow& row : dist.rows) {
        ordered_json j;
        j["section"] = std::string(section_key(dist.section));
        j["category"] = std::string(category_key(row.category));
        j["count"] = row.count;
        if (dist.n_studies > 0) j["percent"] = row.percent;
        out << j.dump() << '\n';
    }
    ordered_json j;
    j["section"] = std::string(section_key(dist.section));
    j["category"] = "no_abnormality";
    j["count"] = dist.no_abnormality_count;
    if (dist.n_studies > 0) j["percent"] = dist.no_abnormality_percent;
    out << j.dump() << '\n';
}

std::string render_cross_tab(const CrossTab& tab, SectionChoice section) {
    std::ostringstream out;
    out << "section: " << section_key(section) << "  studies: " << tab.n_studies << "\n";
    out << std::left << std::setw(16) << "a \\ b";
    for (std::string_view name : kStatusNames) out << std::right << std::setw(18) << name;
    out << "\n";
    for (std::size_t i = 0; i < 4; ++i) {
        out << std::left << std::setw(16) << kStatusNames[i];
        for (std::size_t j = 0; j < 4; ++j) {
            std::string cell = fixed2(tab.row_percent[i][j]) + " (" +
                               std::to_string(tab.counts[i][j]) + ")";
            out << std::right << std::setw(18) << cell;
        }
        out << "\n";
    }
    return out.str();
}

void write_cross_tab_jsonl(std::ostream& out, const CrossTab& tab, SectionChoice section) {
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            ordered_json rec;
            rec["section"] = std::string(section_key(section));
            rec["a"] = std::string(kStatusNames[i]);
            rec["b"] = std::string(kStatusNames[j]);
            rec["count"] = tab.counts[i][j];
            rec["row_percent"] = tab.row_percent[i][j];
            out << rec.dump() << '\n';
        }
    }
}

}  // namespace chexlab
