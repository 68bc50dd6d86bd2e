#include "chexlab/corpus.hpp"

#include <cctype>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "chexlab/error.hpp"
#include "chexlab/pattern.hpp"
#include "chexlab/text.hpp"

namespace chexlab {

namespace {

using json = nlohmann::json;

bool is_space_char(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool ieq_at(std::string_view text, std::size_t pos, std::string_view word) {
    if (pos + word.size() > text.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(text[pos + i])) !=
            std::tolower(static_cast<unsigned char>(word[i])))
            return false;
    }
    return true;
}

// Header words are recognized at the start of the text, of a line, or right
// after a sentence boundary.
bool at_header_position(std::string_view text, std::size_t pos) {
    std::size_t i = pos;
    while (i > 0 && (text[i - 1] == ' ' || text[i - 1] == '\t')) --i;
    if (i == 0) return true;
    char prev = text[i - 1];
    if (prev == '\n' || prev == '\r') return true;
    return prev == '.' || prev == ';' || prev == ':';
}

enum class HeaderKind { Findings, Impression, Other };

struct HeaderMark {
    std::size_t pos = 0;        // first char of the header word
    std::size_t content = 0;    // first char after the header marker
    HeaderKind kind = HeaderKind::Other;
};

// A recognized header is FINDINGS/IMPRESSION (any case) followed by an
// optional colon or a newline. A generic header is a run of ALL-CAPS words
// ending in ':'; it terminates the current section without starting one.
std::optional<HeaderMark> header_at(std::string_view text, std::size_t pos) {
    if (!at_header_position(text, pos)) return std::nullopt;

    for (auto [word, kind] : {std::pair{std::string_view("FINDINGS"), HeaderKind::Findings},
                              std::pair{std::string_view("IMPRESSION"), HeaderKind::Impression}}) {
        if (!ieq_at(text, pos, word)) continue;
        std::size_t i = pos + word.size();
        if (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) != 0))
            continue;  // e.g. "IMPRESSIONS" of a longer word
        std::size_t j = i;
        while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) ++j;
        if (j < text.size() && text[j] == ':') return HeaderMark{pos, j + 1, kind};
        if (j >= text.size() || text[j] == '\n' || text[j] == '\r')
            return HeaderMark{pos, j, kind};  // MIMIC colon-less variant
        return std::nullopt;
    }

    // Generic "SOME HEADER:" boundary.
    std::size_t i = pos;
    std::size_t words = 0;
    while (true) {
        std::size_t w = 0;
        while (i + w < text.size() && std::isupper(static_cast<unsigned char>(text[i + w])) != 0) ++w;
        if (w < 2) break;
        ++words;
        i += w;
        if (i < text.size() && text[i] == ':') {
            if (words >= 1) return HeaderMark{pos, i + 1, HeaderKind::Other};
        }
        if (i < text.size() && text[i] == ' ') {
            ++i;
            continue;
        }
        break;
    }
    return std::nullopt;
}

}  // namespace

RadiologyReport split_sections(std::string_view raw) {
    RadiologyReport report;
    report.raw = std::string(raw);

    if (normalize_text(raw).empty())
        raise(ErrorKind::EmptyReport, "report text is empty");

    std::vector<HeaderMark> marks;
    for (std::size_t pos = 0; pos < raw.size(); ++pos) {
        if (auto mark = header_at(raw, pos)) {
            marks.push_back(*mark);
            pos = mark->content > pos ? mark->content - 1 : pos;
        }
    }

    auto append_section = [](std::optional<std::string>& section, std::string_view piece) {
        std::string text = normalize_text(piece);
        if (text.empty()) return;
        if (!section) {
            section = std::move(text);
        } else {
            *section += ' ';
            *section += text;
        }
    };

    bool any_recognized = false;
    for (std::size_t k = 0; k < marks.size(); ++k) {
        if (marks[k].kind == HeaderKind::Other) continue;
        any_recognized = true;
        std::size_t end = raw.size();
        if (k + 1 < marks.size()) end = marks[k + 1].pos;
        std::string_view piece = raw.substr(marks[k].content, end - marks[k].content);
        append_section(marks[k].kind == HeaderKind::Findings ? report.findings : report.impression,
                       piece);
    }

    if (!any_recognized) {
        // Header-less reports read like summaries; store them as impression.
        report.impression = normalize_text(raw);
    }

    bool has_findings = report.findings && !report.findings->empty();
    bool has_impression = report.impression && !report.impression->empty();
    if (!has_findings && !has_impression)
        raise(ErrorKind::EmptyReport, "no non-empty section after splitting");
    return report;
}

std::pair<SectionChoice, std::string> select_longer_segment(const RadiologyReport& report) {
    bool has_findings = report.findings && !report.findings->empty();
    bool has_impression = report.impression && !report.impression->empty();
    if (!has_findings && !has_impression)
        raise(ErrorKind::EmptyReport, "report '" + report.study_id + "' has no section text");
    if (!has_impression) return {SectionChoice::Findings, *report.findings};
    if (!has_findings) return {SectionChoice::Impression, *report.impression};
    // Equal lengths break toward Findings, the more comprehensive section.
    if (report.findings->size() >= report.impression->size())
        return {SectionChoice::Findings, *report.findings};
    return {SectionChoice::Impression, *report.impression};
}

std::vector<RadiologyReport> keyword_subset(const std::vector<RadiologyReport>& reports,
                                            const std::vector<std::string>& boost_keywords,
                                            std::size_t count) {
    std::vector<const RadiologyReport*> unique;
    std::unordered_set<std::string_view> seen;
    for (const RadiologyReport& r : reports) {
        if (seen.insert(r.study_id).second) unique.push_back(&r);
    }
    if (count > unique.size())
        raise(ErrorKind::InsufficientCorpus,
              "requested " + std::to_string(count) + " reports but only " +
                  std::to_string(unique.size()) + " unique ones available");

    std::vector<TokenPattern> patterns;
    patterns.reserve(boost_keywords.size());
    for (const std::string& k : boost_keywords) patterns.push_back(compile_pattern(k));

    std::vector<const RadiologyReport*> matching;
    std::vector<const RadiologyReport*> rest;
    for (const RadiologyReport* r : unique) {
        auto [section, text] = select_longer_segment(*r);
        (void)section;
        auto tokens = tokenize(text);
        bool hit = false;
        for (const TokenPattern& p : patterns) {
            if (pattern_matches_anywhere(p, tokens)) {
                hit = true;
                break;
            }
        }
        (hit ? matching : rest).push_back(r);
    }

    std::vector<RadiologyReport> out;
    out.reserve(count);
    for (const RadiologyReport* r : matching) {
        if (out.size() == count) break;
        out.push_back(*r);
    }
    for (const RadiologyReport* r : rest) {
        if (out.size() == count) break;
        out.push_back(*r);
    }
    return out;
}

CorpusRecord make_corpus_record(RadiologyReport report) {
    auto [section, text] = select_longer_segment(report);
    return CorpusRecord{std::move(report), section, std::move(text)};
}

namespace {

std::optional<CorpusRecord> record_from_json(const json& j) {
    if (!j.is_object()) return std::nullopt;
    auto id = j.find("study_id");
    if (id == j.end() || !id->is_string() || id->get<std::string>().empty()) return std::nullopt;

    RadiologyReport report;
    report.study_id = id->get<std::string>();
    if (auto text = j.find("text"); text != j.end() && text->is_string()) {
        report = split_sections(text->get<std::string>());
        report.study_id = id->get<std::string>();
    } else {
        bool any = false;
        for (auto [key, dest] : {std::pair{std::string_view("findings"), &report.findings},
                                 std::pair{std::string_view("impression"), &report.impression}}) {
            auto it = j.find(key);
            if (it == j.end() || !it->is_string()) continue;
            std::string text = normalize_text(it->get<std::string>());
            if (text.empty()) continue;
            *dest = std::move(text);
            any = true;
        }
        if (!any) return std::nullopt;
        report.raw = (report.findings ? *report.findings : std::string()) +
                     (report.findings && report.impression ? " " : "") +
                     (report.impression ? *report.impression : std::string());
    }
    return make_corpus_record(std::move(report));
}

}  // namespace

std::vector<CorpusRecord> read_reports_jsonl(std::istream& in, CorpusReadStats* stats) {
    std::vector<CorpusRecord> records;
    std::unordered_set<std::string> seen;
    CorpusReadStats local;
    std::string line;
    while (std::getline(in, line)) {
        if (normalize_text(line).empty()) continue;
        try {
            json j = json::parse(line);
            auto record = record_from_json(j);
            if (!record || !seen.insert(record->report.study_id).second) {
                ++local.skipped;
                continue;
            }
            records.push_back(std::move(*record));
            ++local.rows;
        } catch (const std::exception&) {
            ++local.skipped;
        }
    }
    if (stats) *stats = local;
    return records;
}

void write_corpus_jsonl(std::ostream& out, const std::vector<CorpusRecord>& records) {
    for (const CorpusRecord& r : records) {
        json j;
        j["study_id"] = r.report.study_id;
        if (r.report.findings) j["findings"] = *r.report.findings;
        if (r.report.impression) j["impression"] = *r.report.impression;
        j["selected_section"] = std::string(section_key(r.selected_section));
        j["selected_text"] = r.selected_text;
        out << j.dump() << '\n';
    }
}

std::vector<CorpusRecord> read_corpus_jsonl(std::istream& in, CorpusReadStats* stats) {
    return read_reports_jsonl(in, stats);
}

const std::string& section_text(const CorpusRecord& record, SectionChoice section) {
    const std::optional<std::string>& s =
        section == SectionChoice::Findings ? record.report.findings : record.report.impression;
    if (!s || s->empty())
        raise(ErrorKind::MissingText, "report '" + record.report.study_id + "' has no " +
                                          std::string(section_key(section)) + " text");
    return *s;
}

}  // namespace chexlab
