#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chexlab/error.hpp"

namespace chexlab {

enum class SectionChoice { Findings, Impression };

std::string_view section_key(SectionChoice s);  // "findings" / "impression"
std::optional<SectionChoice> section_from_key(std::string_view key);

inline constexpr int kNumCategories = 13;

// Canonical order. Index 0..12 is fixed and identical in every file format,
// vector and report this toolkit produces.
enum class Category : int {
    Atelectasis = 0,
    Consolidation,
    Effusion,
    Fracture,
    Hyperinflation,
    LungOpacity,
    Nodule,
    PleuralLesion,
    Pneumothorax,
    PulmonaryEdema,
    SubcutaneousEmphysema,
    SubdiaphragmaticGas,
    WidenedMediastinalSilhouette,
};

std::span<const Category> all_categories();
// The 13 minus Hyperinflation, SubcutaneousEmphysema and SubdiaphragmaticGas.
std::span<const Category> comparison_subset_10();

std::string_view category_key(Category c);   // snake_case, used in files
std::string_view category_name(Category c);  // display name, e.g. "Lung Opacity"
std::optional<Category> category_from_key(std::string_view key);
// Case-insensitive; accepts display names and snake_case keys.
std::optional<Category> category_from_name(std::string_view name);

enum class PresenceLabel : std::uint8_t { NotPositive = 0, Positive = 1 };
enum class ExtendedStatus : std::uint8_t { Positive = 0, Negative = 1, Uncertain = 2, NotMentioned = 3 };
enum class LabelScheme { Binary, FourStatus };
enum class UncertainPolicy { MergeUncertainAsPositive, PositiveOnly };

std::string_view status_key(ExtendedStatus s);  // "pos"/"neg"/"unc"/"nm"
std::optional<ExtendedStatus> status_from_key(std::string_view key);

// Per-section labels over the 13 categories, in either the binary
// positive / not-positive scheme or the four-status scheme.
struct LabelVector {
    std::string study_id;
    SectionChoice section = SectionChoice::Findings;
    LabelScheme scheme = LabelScheme::Binary;
    std::array<std::uint8_t, kNumCategories> values{};  // PresenceLabel or ExtendedStatus

    static LabelVector binary(std::string study_id, SectionChoice section);
    static LabelVector four_status(std::string study_id, SectionChoice section);

    PresenceLabel presence(Category c) const;
    ExtendedStatus status(Category c) const;
    void set(Category c, PresenceLabel v);
    void set(Category c, ExtendedStatus v);

    bool operator==(const LabelVector&) const = default;
};

// FourStatus -> Binary under the chosen uncertain policy. Throws
// SchemeMismatch when the input is already binary.
LabelVector merge_uncertain(const LabelVector& v, UncertainPolicy policy);

// True iff all 13 labels of a binary vector are NotPositive.
bool no_abnormality(const LabelVector& v);

// --- label files (CSV) ----------------------------------------------------

struct LabelTable {
    LabelScheme scheme = LabelScheme::Binary;
    std::vector<LabelVector> rows;
};

extern const char* const kLabelCsvHeader;

LabelTable read_label_csv(std::istream& in);
void write_label_csv(std::ostream& out, const LabelTable& table);

// Ingests a CheXpert-scheme prediction CSV (their 14 category names, cells
// 1.0/0.0/-1.0/blank or pos/neg/unc/nm) as a four-status table over our 13
// categories: identity on the shared names, "Pleural Other" -> PleuralLesion,
// and "Enlarged Cardiomediastinum" / "Cardiomegaly" combined into
// WidenedMediastinalSilhouette by most-positive status. Rows without a
// "section" column are assigned `default_section`.
LabelTable read_chexpert_csv(std::istream& in, SectionChoice default_section);

}  // namespace chexlab
