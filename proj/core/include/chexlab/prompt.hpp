#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chexlab/mapper.hpp"
#include "chexlab/taxonomy.hpp"

namespace chexlab {

enum class PromptMode { ExtractFindings, DirectCategorize, FourStatus };

std::string_view prompt_mode_key(PromptMode mode);  // "extract"/"direct"/"four_status"
std::optional<PromptMode> prompt_mode_from_key(std::string_view key);

struct PromptExample {
    std::string report;
    std::string answer;

    bool operator==(const PromptExample&) const = default;
};

// Task instruction plus ordered in-context examples. An empty example list
// is legal (the no-examples ablation). The rendered prompt always places the
// target report last.
struct PromptTemplate {
    std::string instruction;
    PromptMode mode = PromptMode::ExtractFindings;
    std::vector<PromptExample> examples;

    bool operator==(const PromptTemplate&) const = default;
};

// Template file: JSON object {"instruction", "mode", "examples": [{"report",
// "answer"}]}. Unknown keys rejected.
PromptTemplate parse_template(std::string_view text);
PromptTemplate load_template(const std::filesystem::path& path);
std::string render_template(const PromptTemplate& t);

// SHA-256 of the rendered template; recorded in run manifests.
std::string template_hash(const PromptTemplate& t);

// Deterministic concatenation: instruction, each example as a report/answer
// pair, then the target report with an answer cue. Byte-identical across
// calls. Throws EmptyReport on empty report text.
std::string build_prompt(const PromptTemplate& t, std::string_view report_text);

// Answer wire format (what the instruction asks the model for):
//   <findings>
//   - phrase                 (extract mode; "(uncertain)" suffix allowed)
//   - Category Name          (direct mode)
//   - Category Name: status  (four-status mode)
//   </findings>
// "NONE" stands for an empty list. The parser also accepts bare "-"/"*" or
// "1." numbered lists without the delimiters.
extern const char* const kAnswerBegin;
extern const char* const kAnswerEnd;

using ParsedAnswer = std::variant<std::vector<FindingMention>, LabelVector>;

// Throws MalformedResponse when no list structure is found and
// UnknownCategory when a direct/four-status line names something outside the
// taxonomy. study_id/section fill the returned vector's identity fields.
ParsedAnswer parse_findings(std::string_view raw_response, PromptMode mode,
                            std::string study_id = {},
                            SectionChoice section = SectionChoice::Findings);

// Renders the answer block the stub provider (and the shipped example set)
// uses; the exact inverse of parse_findings for canonical content.
std::string render_extract_answer(std::span<const FindingMention> mentions);
std::string render_direct_answer(const LabelVector& binary);
std::string render_four_status_answer(const LabelVector& four_status);

}  // namespace chexlab
