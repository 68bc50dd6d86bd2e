#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chexlab/taxonomy.hpp"

namespace chexlab {

// One study's free-text report, split into its Findings and Impression
// sections. Section text is always normalized (no newlines, no doubled
// spaces, trimmed).
struct RadiologyReport {
    std::string study_id;
    std::optional<std::string> findings;
    std::optional<std::string> impression;
    std::string raw;

    bool operator==(const RadiologyReport&) const = default;
};

// Recognizes case-insensitive "FINDINGS:" / "IMPRESSION:" headers at the
// start of the text, of a line, or after a sentence boundary; the MIMIC
// colon-less variant (header word followed by a newline) is accepted too.
// Other ALL-CAPS "WORD:" headers end a section without starting one. When
// neither header appears the whole normalized text is stored as impression.
// Throws EmptyReport when the normalized text is empty.
RadiologyReport split_sections(std::string_view raw);

// The section with more characters; ties break toward Findings. Throws
// EmptyReport when both sections are absent.
std::pair<SectionChoice, std::string> select_longer_segment(const RadiologyReport& report);

// Reports whose longer segment matches at least one boost keyword (in input
// order), then enough non-matching reports (in input order) to reach `count`.
// Keywords are case-insensitive word patterns; a trailing '*' marks a prefix
// stem. Duplicate study_ids keep the first occurrence. Throws
// InsufficientCorpus when `count` exceeds the number of unique reports.
std::vector<RadiologyReport> keyword_subset(const std::vector<RadiologyReport>& reports,
                                            const std::vector<std::string>& boost_keywords,
                                            std::size_t count);

// --- corpus files (JSON lines) ---------------------------------------------

struct CorpusRecord {
    RadiologyReport report;
    SectionChoice selected_section = SectionChoice::Impression;
    std::string selected_text;
};

CorpusRecord make_corpus_record(RadiologyReport report);

struct CorpusReadStats {
    std::size_t rows = 0;
    std::size_t skipped = 0;
};

// Reads raw input records: {"study_id": ..., "text": ...} or pre-split
// {"study_id": ..., "findings": ..., "impression": ...}. Malformed lines and
// empty reports are skipped and counted, never fatal.
std::vector<CorpusRecord> read_reports_jsonl(std::istream& in, CorpusReadStats* stats = nullptr);

// Output/corpus format: one object per line with study_id, findings,
// impression, selected_section and selected_text.
void write_corpus_jsonl(std::ostream& out, const std::vector<CorpusRecord>& records);
std::vector<CorpusRecord> read_corpus_jsonl(std::istream& in, CorpusReadStats* stats = nullptr);

const std::string& section_text(const CorpusRecord& record, SectionChoice section);

}  // namespace chexlab
