#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "chexlab/lexicon.hpp"
#include "chexlab/prompt.hpp"

namespace chexlab {

struct ChatRequest {
    std::string model_id;
    std::string prompt;
    double temperature = 0.0;  // 0 for reproducible labeling runs
    int max_tokens = 1024;
};

struct ChatResponse {
    std::string text;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    double latency_ms = 0.0;
};

// A chat-completion endpoint. Implementations throw Error(Http) on transport
// or provider failures.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual std::string describe() const = 0;
};

// Talks the ubiquitous chat-completion wire schema: POST {base_url}{path}
// with {"model", "messages": [{"role": "user", "content": ...}],
// "temperature", "max_tokens"}; reads choices[0].message.content.
class HttpChatClient final : public ChatClient {
public:
    struct Options {
        std::string base_url;                      // e.g. "https://api.example.com"
        std::string path = "/v1/chat/completions";
        std::string api_key;                       // sent as a bearer token when non-empty
        int timeout_seconds = 120;
    };

    explicit HttpChatClient(Options options);
    ChatResponse complete(const ChatRequest& request) override;
    std::string describe() const override;

private:
    Options options_;
};

// Reads CHEX_API_KEY from the environment (empty when unset).
std::string api_key_from_env();

// Deterministic offline provider: echoes the lexicon matches of the report
// found at the end of the prompt, formatted per mode. Optionally injects
// transient or permanent faults for retry/quarantine testing.
class StubChatClient final : public ChatClient {
public:
    struct Options {
        PromptMode mode = PromptMode::ExtractFindings;
        int fail_attempts_per_report = 0;  // transient: first N calls per report fail
        std::string poison_token;          // reports containing this token always fail
        int delay_ms = 0;                  // simulated provider latency
    };

    explicit StubChatClient(MappingLexicon lexicon);
    StubChatClient(MappingLexicon lexicon, Options options);
    ChatResponse complete(const ChatRequest& request) override;
    std::string describe() const override;

private:
    MappingLexicon lexicon_;
    Options options_;
    std::mutex mutex_;
    std::unordered_map<std::string, int> calls_per_report_;
};

// One file per key under the cache directory, filename = lowercase hex
// SHA-256 of (model, prompt, decoding parameters). Writers publish
// atomically (temp file + rename), so concurrent readers never observe a
// partial entry and a hit always replays byte-identical text.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    static std::string key_for(const ChatRequest& request);
    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, std::string_view response_text);
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

}  // namespace chexlab
