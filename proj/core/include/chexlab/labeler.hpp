#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chexlab/chat_client.hpp"
#include "chexlab/corpus.hpp"
#include "chexlab/lexicon.hpp"
#include "chexlab/prompt.hpp"
#include "chexlab/taxonomy.hpp"

namespace chexlab {

struct RetryPolicy {
    int max_attempts = 5;
    int base_delay_ms = 1000;
    double factor = 2.0;
};

struct LabelProvenance {
    PromptMode mode = PromptMode::ExtractFindings;
    std::string model_id;
    std::string cache_key;
};

struct PseudoLabelResult {
    LabelVector label;
    LabelProvenance provenance;
    int attempts = 1;
    bool cache_hit = false;
};

// Labels one report's selected section: builds the prompt, consults the
// cache, calls the client with retries, parses the answer and (in extract
// mode) maps the mentions through the lexicon. Only parseable responses are
// cached, so a warm cache always replays to the same vector.
PseudoLabelResult pseudo_label(const CorpusRecord& record, const PromptTemplate& prompt_template,
                               const MappingLexicon& lexicon, ChatClient& client,
                               ResponseCache* cache, const ChatRequest& base_request,
                               const RetryPolicy& retry = {});

struct QuarantineRecord {
    std::string study_id;
    std::string section;
    std::string error;
    int attempts = 0;
};

struct BatchOptions {
    int concurrency = 4;
    std::optional<std::filesystem::path> cache_dir;
    RetryPolicy retry;
};

struct BatchResult {
    LabelTable labels;                          // in corpus order
    std::vector<QuarantineRecord> quarantined;  // in corpus order
    std::size_t network_calls = 0;
    std::size_t cache_hits = 0;
    std::size_t retries = 0;  // failed attempts that were retried
};

// Every report yields exactly one label vector or one quarantine record:
// labels.rows.size() + quarantined.size() == corpus.size(). Output order is
// the corpus order regardless of completion order.
BatchResult batch_label(const std::vector<CorpusRecord>& corpus,
                        const PromptTemplate& prompt_template, const MappingLexicon& lexicon,
                        ChatClient& client, const ChatRequest& base_request,
                        const BatchOptions& options);

void write_quarantine_jsonl(std::ostream& out, const std::vector<QuarantineRecord>& records);

}  // namespace chexlab
