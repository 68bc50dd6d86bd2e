#include "chexlab/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "chexlab/digest.hpp"
#include "chexlab/error.hpp"
#include "chexlab/text.hpp"

namespace chexlab {

const char* const kAnswerBegin = "<findings>";
const char* const kAnswerEnd = "</findings>";

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool iequals(std::string_view a, std::string_view b) {
    return to_lower_ascii(a) == to_lower_ascii(b);
}

// "- item", "* item", "1. item", "2) item" -> item
std::optional<std::string> list_item(std::string_view line) {
    std::string t = trim(line);
    if (t.empty()) return std::nullopt;
    if (t[0] == '-' || t[0] == '*') return trim(t.substr(1));
    std::size_t i = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')')) return trim(t.substr(i + 1));
    return std::nullopt;
}

}  // namespace

std::string_view prompt_mode_key(PromptMode mode) {
    switch (mode) {
        case PromptMode::ExtractFindings: return "extract";
        case PromptMode::DirectCategorize: return "direct";
        case PromptMode::FourStatus: return "four_status";
    }
    return "extract";
}

std::optional<PromptMode> prompt_mode_from_key(std::string_view key) {
    if (key == "extract") return PromptMode::ExtractFindings;
    if (key == "direct") return PromptMode::DirectCategorize;
    if (key == "four_status" || key == "four-status") return PromptMode::FourStatus;
    return std::nullopt;
}

PromptTemplate parse_template(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        raise(ErrorKind::Config, std::string("invalid template JSON: ") + e.what());
    }
    if (!doc.is_object()) raise(ErrorKind::Config, "template must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key != "instruction" && key != "mode" && key != "examples")
            raise(ErrorKind::Config, "unknown template key '" + key + "'");
    }
    if (!doc.contains("instruction") || !doc["instruction"].is_string())
        raise(ErrorKind::Config, "template needs a string 'instruction'");
    if (!doc.contains("mode") || !doc["mode"].is_string())
        raise(ErrorKind::Config, "template needs a string 'mode'");

    PromptTemplate t;
    t.instruction = doc["instruction"].get<std::string>();
    auto mode = prompt_mode_from_key(doc["mode"].get<std::string>());
    if (!mode) raise(ErrorKind::Config, "bad template mode '" + doc["mode"].get<std::string>() + "'");
    t.mode = *mode;
    if (doc.contains("examples")) {
        if (!doc["examples"].is_array()) raise(ErrorKind::Config, "'examples' must be an array");
        for (const auto& ex : doc["examples"]) {
            if (!ex.is_object() || !ex.contains("report") || !ex.contains("answer"))
                raise(ErrorKind::Config, "each example needs 'report' and 'answer'");
            for (const auto& [key, value] : ex.items()) {
                if (key != "report" && key != "answer")
                    raise(ErrorKind::Config, "unknown example key '" + key + "'");
            }
            t.examples.push_back(
                PromptExample{ex["report"].get<std::string>(), ex["answer"].get<std::string>()});
        }
    }
    return t;
}

PromptTemplate load_template(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::Io, "cannot open template file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_template(buf.str());
}

std::string render_template(const PromptTemplate& t) {
    ordered_json doc;
    doc["instruction"] = t.instruction;
    doc["mode"] = std::string(prompt_mode_key(t.mode));
    doc["examples"] = ordered_json::array();
    for (const PromptExample& ex : t.examples) {
        ordered_json j;
        j["report"] = ex.report;
        j["answer"] = ex.answer;
        doc["examples"].push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

std::string template_hash(const PromptTemplate& t) { return sha256_hex(render_template(t)); }

std::string build_prompt(const PromptTemplate& t, std::string_view report_text) {
    if (trim(report_text).empty()) raise(ErrorKind::EmptyReport, "cannot prompt for empty report");
    std::string out = t.instruction;
    out += '\n';
    for (const PromptExample& ex : t.examples) {
        out += "\nReport: ";
        out += ex.report;
        out += "\nAnswer:\n";
        out += ex.answer;
        out += '\n';
    }
    out += "\nReport: ";
    out += report_text;
    out += "\nAnswer:\n";
    return out;
}

ParsedAnswer parse_findings(std::string_view raw_response, PromptMode mode, std::string study_id,
                            SectionChoice section) {
    std::string_view body = raw_response;
    bool framed = false;
    if (auto begin = raw_response.find(kAnswerBegin); begin != std::string_view::npos) {
        std::size_t content = begin + std::string_view(kAnswerBegin).size();
        std::size_t end = raw_response.find(kAnswerEnd, content);
        if (end == std::string_view::npos) end = raw_response.size();
        body = raw_response.substr(content, end - content);
        framed = true;
    }

    std::vector<std::string> items;
    std::istringstream lines{std::string(body)};
    std::string line;
    while (std::getline(lines, line)) {
        if (auto item = list_item(line)) {
            if (!item->empty() && !iequals(*item, "none")) items.push_back(std::move(*item));
        }
    }
    if (items.empty()) {
        bool explicit_none = iequals(trim(body), "none") || (framed && trim(body).empty());
        if (!explicit_none)
            raise(ErrorKind::MalformedResponse, "no findings list in response: '" +
                                                    trim(raw_response).substr(0, 80) + "'");
    }

    if (mode == PromptMode::ExtractFindings) {
        std::vector<FindingMention> mentions;
        for (std::string& item : items) {
            ExtendedStatus status = ExtendedStatus::Positive;
            for (std::string_view tag : {" (uncertain)", " [uncertain]"}) {
                if (item.size() > tag.size() &&
                    iequals(std::string_view(item).substr(item.size() - tag.size()), tag)) {
                    item.resize(item.size() - tag.size());
                    item = trim(item);
                    status = ExtendedStatus::Uncertain;
                    break;
                }
            }
            if (item.empty()) raise(ErrorKind::MalformedResponse, "empty finding phrase");
            mentions.push_back(FindingMention{std::move(item), status, std::nullopt});
        }
        return mentions;
    }

    if (mode == PromptMode::DirectCategorize) {
        LabelVector v = LabelVector::binary(std::move(study_id), section);
        for (const std::string& item : items) {
            auto cat = category_from_name(item);
            if (!cat) raise(ErrorKind::UnknownCategory, "'" + item + "' is not one of the 13 categories");
            v.set(*cat, PresenceLabel::Positive);
        }
        return v;
    }

    LabelVector v = LabelVector::four_status(std::move(study_id), section);
    for (const std::string& item : items) {
        auto colon = item.rfind(':');
        if (colon == std::string::npos)
            raise(ErrorKind::MalformedResponse, "four-status line without ':': '" + item + "'");
        std::string name = trim(std::string_view(item).substr(0, colon));
        std::string status_word = to_lower_ascii(trim(std::string_view(item).substr(colon + 1)));
        auto cat = category_from_name(name);
        if (!cat) raise(ErrorKind::UnknownCategory, "'" + name + "' is not one of the 13 categories");
        ExtendedStatus status;
        if (status_word == "positive" || status_word == "pos") {
            status = ExtendedStatus::Positive;
        } else if (status_word == "negative" || status_word == "neg") {
            status = ExtendedStatus::Negative;
        } else if (status_word == "uncertain" || status_word == "unc") {
            status = ExtendedStatus::Uncertain;
        } else if (status_word == "not mentioned" || status_word == "nm") {
            status = ExtendedStatus::NotMentioned;
        } else {
            raise(ErrorKind::MalformedResponse, "bad status '" + status_word + "'");
        }
        v.set(*cat, status);
    }
    return v;
}

std::string render_extract_answer(std::span<const FindingMention> mentions) {
    std::string out = kAnswerBegin;
    out += '\n';
    if (mentions.empty()) {
        out += "NONE\n";
    } else {
        for (const FindingMention& m : mentions) {
            out += "- ";
            out += m.phrase;
            if (m.status == ExtendedStatus::Uncertain) out += " (uncertain)";
            out += '\n';
        }
    }
    out += kAnswerEnd;
    return out;
}

std::string render_direct_answer(const LabelVector& binary) {
    std::string out = kAnswerBegin;
    out += '\n';
    bool any = false;
    for (Category c : all_categories()) {
        if (binary.presence(c) == PresenceLabel::Positive) {
            out += "- ";
            out += category_name(c);
            out += '\n';
            any = true;
        }
    }
    if (!any) out += "NONE\n";
    out += kAnswerEnd;
    return out;
}

std::string render_four_status_answer(const LabelVector& four_status) {
    std::string out = kAnswerBegin;
    out += '\n';
    bool any = false;
    for (Category c : all_categories()) {
        ExtendedStatus s = four_status.status(c);
        if (s == ExtendedStatus::NotMentioned) continue;
        out += "- ";
        out += category_name(c);
        out += ": ";
        switch (s) {
            case ExtendedStatus::Positive: out += "positive"; break;
            case ExtendedStatus::Negative: out += "negative"; break;
            case ExtendedStatus::Uncertain: out += "uncertain"; break;
            case ExtendedStatus::NotMentioned: break;
        }
        out += '\n';
        any = true;
    }
    if (!any) out += "NONE\n";
    out += kAnswerEnd;
    return out;
}

}  // namespace chexlab
