#include "chexlab/taxonomy.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "chexlab/text.hpp"

namespace chexlab {

namespace {

constexpr std::array<Category, kNumCategories> kAllCategories = {
    Category::Atelectasis,
    Category::Consolidation,
    Category::Effusion,
    Category::Fracture,
    Category::Hyperinflation,
    Category::LungOpacity,
    Category::Nodule,
    Category::PleuralLesion,
    Category::Pneumothorax,
    Category::PulmonaryEdema,
    Category::SubcutaneousEmphysema,
    Category::SubdiaphragmaticGas,
    Category::WidenedMediastinalSilhouette,
};

constexpr std::array<Category, 10> kComparison10 = {
    Category::Atelectasis,
    Category::Consolidation,
    Category::Effusion,
    Category::Fracture,
    Category::LungOpacity,
    Category::Nodule,
    Category::PleuralLesion,
    Category::Pneumothorax,
    Category::PulmonaryEdema,
    Category::WidenedMediastinalSilhouette,
};

constexpr std::array<std::string_view, kNumCategories> kKeys = {
    "atelectasis",
    "consolidation",
    "effusion",
    "fracture",
    "hyperinflation",
    "lung_opacity",
    "nodule",
    "pleural_lesion",
    "pneumothorax",
    "pulmonary_edema",
    "subcutaneous_emphysema",
    "subdiaphragmatic_gas",
    "widened_mediastinal_silhouette",
};

constexpr std::array<std::string_view, kNumCategories> kNames = {
    "Atelectasis",
    "Consolidation",
    "Effusion",
    "Fracture",
    "Hyperinflation",
    "Lung Opacity",
    "Nodule",
    "Pleural Lesion",
    "Pneumothorax",
    "Pulmonary Edema",
    "Subcutaneous Emphysema",
    "Subdiaphragmatic Gas",
    "Widened Mediastinal Silhouette",
};

std::string fold_name(std::string_view name) {
    std::string folded;
    for (char c : name) {
        if (c == ' ' || c == '_' || c == '-') continue;
        folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return folded;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace

std::string_view section_key(SectionChoice s) {
    return s == SectionChoice::Findings ? "findings" : "impression";
}

std::optional<SectionChoice> section_from_key(std::string_view key) {
    std::string k = to_lower_ascii(key);
    if (k == "findings") return SectionChoice::Findings;
    if (k == "impression") return SectionChoice::Impression;
    return std::nullopt;
}

std::span<const Category> all_categories() { return kAllCategories; }
std::span<const Category> comparison_subset_10() { return kComparison10; }

std::string_view category_key(Category c) { return kKeys[static_cast<int>(c)]; }
std::string_view category_name(Category c) { return kNames[static_cast<int>(c)]; }

std::optional<Category> category_from_key(std::string_view key) {
    for (Category c : kAllCategories) {
        if (category_key(c) == key) return c;
    }
    return std::nullopt;
}

std::optional<Category> category_from_name(std::string_view name) {
    std::string folded = fold_name(name);
    for (Category c : kAllCategories) {
        if (folded == fold_name(category_name(c))) return c;
    }
    return std::nullopt;
}

std::string_view status_key(ExtendedStatus s) {
    switch (s) {
        case ExtendedStatus::Positive: return "pos";
        case ExtendedStatus::Negative: return "neg";
        case ExtendedStatus::Uncertain: return "unc";
        case ExtendedStatus::NotMentioned: return "nm";
    }
    return "nm";
}

std::optional<ExtendedStatus> status_from_key(std::string_view key) {
    if (key == "pos") return ExtendedStatus::Positive;
    if (key == "neg") return ExtendedStatus::Negative;
    if (key == "unc") return ExtendedStatus::Uncertain;
    if (key == "nm") return ExtendedStatus::NotMentioned;
    return std::nullopt;
}

LabelVector LabelVector::binary(std::string study_id, SectionChoice section) {
    LabelVector v;
    v.study_id = std::move(study_id);
    v.section = section;
    v.scheme = LabelScheme::Binary;
    v.values.fill(static_cast<std::uint8_t>(PresenceLabel::NotPositive));
    return v;
}

LabelVector LabelVector::four_status(std::string study_id, SectionChoice section) {
    LabelVector v;
    v.study_id = std::move(study_id);
    v.section = section;
    v.scheme = LabelScheme::FourStatus;
    v.values.fill(static_cast<std::uint8_t>(ExtendedStatus::NotMentioned));
    return v;
}

PresenceLabel LabelVector::presence(Category c) const {
    if (scheme != LabelScheme::Binary)
        raise(ErrorKind::SchemeMismatch, "presence() on a four-status vector");
    return static_cast<PresenceLabel>(values[static_cast<int>(c)]);
}

ExtendedStatus LabelVector::status(Category c) const {
    if (scheme != LabelScheme::FourStatus)
        raise(ErrorKind::SchemeMismatch, "status() on a binary vector");
    return static_cast<ExtendedStatus>(values[static_cast<int>(c)]);
}

void LabelVector::set(Category c, PresenceLabel v) {
    if (scheme != LabelScheme::Binary)
        raise(ErrorKind::SchemeMismatch, "binary set() on a four-status vector");
    values[static_cast<int>(c)] = static_cast<std::uint8_t>(v);
}

void LabelVector::set(Category c, ExtendedStatus v) {
    if (scheme != LabelScheme::FourStatus)
        raise(ErrorKind::SchemeMismatch, "four-status set() on a binary vector");
    values[static_cast<int>(c)] = static_cast<std::uint8_t>(v);
}

LabelVector merge_uncertain(const LabelVector& v, UncertainPolicy policy) {
    if (v.scheme != LabelScheme::FourStatus)
        raise(ErrorKind::SchemeMismatch, "merge_uncertain() needs a four-status vector");
    LabelVector out = LabelVector::binary(v.study_id, v.section);
    for (Category c : kAllCategories) {
        ExtendedStatus s = v.status(c);
        bool positive = s == ExtendedStatus::Positive ||
                        (policy == UncertainPolicy::MergeUncertainAsPositive &&
                         s == ExtendedStatus::Uncertain);
        out.set(c, positive ? PresenceLabel::Positive : PresenceLabel::NotPositive);
    }
    return out;
}

bool no_abnormality(const LabelVector& v) {
    if (v.scheme != LabelScheme::Binary)
        raise(ErrorKind::SchemeMismatch, "no_abnormality() needs a binary vector");
    return std::all_of(kAllCategories.begin(), kAllCategories.end(), [&](Category c) {
        return v.presence(c) == PresenceLabel::NotPositive;
    });
}

const char* const kLabelCsvHeader =
    "study_id,section,atelectasis,consolidation,effusion,fracture,hyperinflation,"
    "lung_opacity,nodule,pleural_lesion,pneumothorax,pulmonary_edema,"
    "subcutaneous_emphysema,subdiaphragmatic_gas,widened_mediastinal_silhouette";

LabelTable read_label_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        raise(ErrorKind::Io, "label file is empty (missing header row)");
    auto header = split_csv_line(line);
    auto expected = split_csv_line(kLabelCsvHeader);
    if (header != expected)
        raise(ErrorKind::Io, "label file header does not match the canonical column order");

    LabelTable table;
    bool scheme_known = false;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 2 + kNumCategories)
            raise(ErrorKind::Io, "line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(2 + kNumCategories) + " cells");
        auto section = section_from_key(cells[1]);
        if (!section)
            raise(ErrorKind::Io, "line " + std::to_string(line_no) + ": bad section '" + cells[1] + "'");

        bool binary_cells = cells[2] == "0" || cells[2] == "1";
        if (!scheme_known) {
            table.scheme = binary_cells ? LabelScheme::Binary : LabelScheme::FourStatus;
            scheme_known = true;
        }

        LabelVector v = table.scheme == LabelScheme::Binary
                            ? LabelVector::binary(cells[0], *section)
                            : LabelVector::four_status(cells[0], *section);
        for (int i = 0; i < kNumCategories; ++i) {
            const std::string& cell = cells[2 + i];
            if (table.scheme == LabelScheme::Binary) {
                if (cell != "0" && cell != "1")
                    raise(ErrorKind::Io, "line " + std::to_string(line_no) + ": bad binary cell '" + cell + "'");
                v.values[i] = cell == "1" ? 1 : 0;
            } else {
                auto s = status_from_key(cell);
                if (!s)
                    raise(ErrorKind::Io, "line " + std::to_string(line_no) + ": bad status cell '" + cell + "'");
                v.values[i] = static_cast<std::uint8_t>(*s);
            }
        }
        table.rows.push_back(std::move(v));
    }
    return table;
}

void write_label_csv(std::ostream& out, const LabelTable& table) {
    out << kLabelCsvHeader << '\n';
    for (const LabelVector& v : table.rows) {
        out << v.study_id << ',' << section_key(v.section);
        for (int i = 0; i < kNumCategories; ++i) {
            out << ',';
            if (table.scheme == LabelScheme::Binary) {
                out << (v.values[i] ? '1' : '0');
            } else {
                out << status_key(static_cast<ExtendedStatus>(v.values[i]));
            }
        }
        out << '\n';
    }
}

namespace {

// CheXpert-style cell: 1.0 positive, 0.0 negative, -1.0 uncertain, blank not
// mentioned. Our own status keys are accepted too.
std::optional<ExtendedStatus> chexpert_cell(std::string_view cell) {
    if (cell.empty()) return ExtendedStatus::NotMentioned;
    if (auto s = status_from_key(cell)) return s;
    if (cell == "1" || cell == "1.0") return ExtendedStatus::Positive;
    if (cell == "0" || cell == "0.0") return ExtendedStatus::Negative;
    if (cell == "-1" || cell == "-1.0") return ExtendedStatus::Uncertain;
    return std::nullopt;
}

// Most-positive wins when two source columns land on one category.
ExtendedStatus combine_status(ExtendedStatus a, ExtendedStatus b) {
    auto rank = [](ExtendedStatus s) {
        switch (s) {
            case ExtendedStatus::Positive: return 3;
            case ExtendedStatus::Uncertain: return 2;
            case ExtendedStatus::Negative: return 1;
            case ExtendedStatus::NotMentioned: return 0;
        }
        return 0;
    };
    return rank(a) >= rank(b) ? a : b;
}

std::optional<Category> chexpert_column(std::string_view name) {
    static const std::unordered_map<std::string, Category> kMap = {
        {"atelectasis", Category::Atelectasis},
        {"consolidation", Category::Consolidation},
        {"pleuraleffusion", Category::Effusion},
        {"effusion", Category::Effusion},
        {"fracture", Category::Fracture},
        {"lungopacity", Category::LungOpacity},
        {"lunglesion", Category::Nodule},
        {"nodule", Category::Nodule},
        {"edema", Category::PulmonaryEdema},
        {"pulmonaryedema", Category::PulmonaryEdema},
        {"pneumothorax", Category::Pneumothorax},
        {"pleuralother", Category::PleuralLesion},
        {"pleurallesion", Category::PleuralLesion},
        {"enlargedcardiomediastinum", Category::WidenedMediastinalSilhouette},
        {"cardiomegaly", Category::WidenedMediastinalSilhouette},
        {"widenedmediastinalsilhouette", Category::WidenedMediastinalSilhouette},
    };
    auto it = kMap.find(fold_name(name));
    if (it == kMap.end()) return std::nullopt;
    return it->second;
}

}  // namespace

LabelTable read_chexpert_csv(std::istream& in, SectionChoice default_section) {
    std::string line;
    if (!std::getline(in, line))
        raise(ErrorKind::Io, "prediction file is empty (missing header row)");
    auto header = split_csv_line(line);

    int id_col = 0;
    int section_col = -1;
    std::vector<std::pair<int, Category>> category_cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string folded = fold_name(header[i]);
        if (folded == "studyid") {
            id_col = static_cast<int>(i);
        } else if (folded == "section") {
            section_col = static_cast<int>(i);
        } else if (auto c = chexpert_column(header[i])) {
            category_cols.emplace_back(static_cast<int>(i), *c);
        }
        // remaining CheXpert categories (No Finding, Pneumonia, ...) are dropped
    }
    if (category_cols.empty())
        raise(ErrorKind::Io, "no recognizable category columns in prediction file header");

    LabelTable table;
    table.scheme = LabelScheme::FourStatus;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() < header.size())
            raise(ErrorKind::Io, "line " + std::to_string(line_no) + ": short row");
        SectionChoice section = default_section;
        if (section_col >= 0) {
            auto s = section_from_key(cells[section_col]);
            if (!s)
                raise(ErrorKind::Io, "line " + std::to_string(line_no) + ": bad section cell");
            section = *s;
        }
        LabelVector v = LabelVector::four_status(cells[id_col], section);
        for (auto [col, cat] : category_cols) {
            auto s = chexpert_cell(cells[col]);
            if (!s)
                raise(ErrorKind::Io, "line " + std::to_string(line_no) + ": bad cell '" + cells[col] + "'");
            v.set(cat, combine_status(v.status(cat), *s));
        }
        table.rows.push_back(std::move(v));
    }
    return table;
}

}  // namespace chexlab
