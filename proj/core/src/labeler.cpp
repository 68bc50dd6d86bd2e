#include "chexlab/labeler.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ostream>
#include <thread>
#include <variant>

#include <nlohmann/json.hpp>

#include "chexlab/error.hpp"
#include "chexlab/mapper.hpp"

namespace chexlab {

namespace {

LabelVector answer_to_vector(const ParsedAnswer& answer, const MappingLexicon& lexicon,
                             const std::string& study_id, SectionChoice section) {
    if (std::holds_alternative<LabelVector>(answer)) return std::get<LabelVector>(answer);
    const auto& mentions = std::get<std::vector<FindingMention>>(answer);
    return map_mentions(mentions, lexicon, study_id, section);
}

void backoff_sleep(const RetryPolicy& retry, int failed_attempts) {
    double delay = retry.base_delay_ms * std::pow(retry.factor, failed_attempts - 1);
    if (delay <= 0) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(delay)));
}

}  // namespace

PseudoLabelResult pseudo_label(const CorpusRecord& record, const PromptTemplate& prompt_template,
                               const MappingLexicon& lexicon, ChatClient& client,
                               ResponseCache* cache, const ChatRequest& base_request,
                               const RetryPolicy& retry) {
    ChatRequest request = base_request;
    request.prompt = build_prompt(prompt_template, record.selected_text);
    std::string key = ResponseCache::key_for(request);

    PseudoLabelResult result;
    result.provenance =
        LabelProvenance{prompt_template.mode, request.model_id, key};

    if (cache) {
        if (auto hit = cache->get(key)) {
            result.cache_hit = true;
            result.attempts = 0;
            auto answer = parse_findings(*hit, prompt_template.mode, record.report.study_id,
                                         record.selected_section);
            result.label =
                answer_to_vector(answer, lexicon, record.report.study_id, record.selected_section);
            return result;
        }
    }

    Error last_error(ErrorKind::Http, "no attempt made");
    for (int attempt = 1; attempt <= retry.max_attempts; ++attempt) {
        result.attempts = attempt;
        try {
            ChatResponse response = client.complete(request);
            auto answer = parse_findings(response.text, prompt_template.mode,
                                         record.report.study_id, record.selected_section);
            result.label =
                answer_to_vector(answer, lexicon, record.report.study_id, record.selected_section);
            if (cache) cache->put(key, response.text);
            return result;
        } catch (const Error& e) {
            last_error = e;
            if (attempt < retry.max_attempts) backoff_sleep(retry, attempt);
        }
    }
    throw Error(last_error.kind(), "report '" + record.report.study_id + "' after " +
                                       std::to_string(retry.max_attempts) +
                                       " attempts: " + last_error.what());
}

BatchResult batch_label(const std::vector<CorpusRecord>& corpus,
                        const PromptTemplate& prompt_template, const MappingLexicon& lexicon,
                        ChatClient& client, const ChatRequest& base_request,
                        const BatchOptions& options) {
    if (options.concurrency < 1)
        raise(ErrorKind::Config, "concurrency limit must be >= 1");

    std::optional<ResponseCache> cache;
    if (options.cache_dir) cache.emplace(*options.cache_dir);

    struct Slot {
        std::optional<LabelVector> label;
        std::optional<QuarantineRecord> quarantine;
    };
    std::vector<Slot> slots(corpus.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> network_calls{0};
    std::atomic<std::size_t> cache_hits{0};
    std::atomic<std::size_t> retries{0};

    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= corpus.size()) return;
            const CorpusRecord& record = corpus[i];
            try {
                PseudoLabelResult r =
                    pseudo_label(record, prompt_template, lexicon, client,
                                 cache ? &*cache : nullptr, base_request, options.retry);
                network_calls += static_cast<std::size_t>(r.attempts);
                if (r.cache_hit) ++cache_hits;
                if (r.attempts > 1) retries += static_cast<std::size_t>(r.attempts - 1);
                slots[i].label = std::move(r.label);
            } catch (const Error& e) {
                network_calls += static_cast<std::size_t>(options.retry.max_attempts);
                retries += static_cast<std::size_t>(options.retry.max_attempts - 1);
                slots[i].quarantine =
                    QuarantineRecord{record.report.study_id,
                                     std::string(section_key(record.selected_section)), e.what(),
                                     options.retry.max_attempts};
            }
        }
    };

    std::size_t n_threads = std::min<std::size_t>(
        static_cast<std::size_t>(options.concurrency), std::max<std::size_t>(corpus.size(), 1));
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    BatchResult result;
    result.labels.scheme = prompt_template.mode == PromptMode::FourStatus
                               ? LabelScheme::FourStatus
                               : LabelScheme::Binary;
    for (Slot& slot : slots) {
        if (slot.label) {
            result.labels.rows.push_back(std::move(*slot.label));
        } else if (slot.quarantine) {
            result.quarantined.push_back(std::move(*slot.quarantine));
        }
    }
    result.network_calls = network_calls.load();
    result.cache_hits = cache_hits.load();
    result.retries = retries.load();
    return result;
}

void write_quarantine_jsonl(std::ostream& out, const std::vector<QuarantineRecord>& records) {
    for (const QuarantineRecord& r : records) {
        nlohmann::ordered_json j;
        j["study_id"] = r.study_id;
        j["section"] = r.section;
        j["error"] = r.error;
        j["attempts"] = r.attempts;
        out << j.dump() << '\n';
    }
}

}  // namespace chexlab
