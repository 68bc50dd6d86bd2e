#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "chexlab/chat_client.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "chexlab/digest.hpp"
#include "chexlab/error.hpp"
#include "chexlab/mapper.hpp"

namespace chexlab {

namespace {

using json = nlohmann::json;

}  // namespace

HttpChatClient::HttpChatClient(Options options) : options_(std::move(options)) {
    if (options_.base_url.empty()) raise(ErrorKind::Config, "HttpChatClient needs a base URL");
}

std::string HttpChatClient::describe() const { return "http:" + options_.base_url; }

ChatResponse HttpChatClient::complete(const ChatRequest& request) {
    json body;
    body["model"] = request.model_id;
    body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;

    httplib::Client client(options_.base_url);
    client.set_connection_timeout(options_.timeout_seconds);
    client.set_read_timeout(options_.timeout_seconds);
    httplib::Headers headers;
    if (!options_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + options_.api_key);

    auto start = std::chrono::steady_clock::now();
    auto result = client.Post(options_.path, headers, body.dump(), "application/json");
    auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);

    if (!result)
        raise(ErrorKind::Http, "request to " + options_.base_url + " failed: " +
                                   httplib::to_string(result.error()));
    if (result->status != 200)
        raise(ErrorKind::Http, "provider returned HTTP " + std::to_string(result->status) + ": " +
                                   result->body.substr(0, 200));

    ChatResponse response;
    response.latency_ms = elapsed.count();
    try {
        json parsed = json::parse(result->body);
        response.text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
        if (parsed.contains("usage")) {
            response.prompt_tokens = parsed["usage"].value("prompt_tokens", 0L);
            response.completion_tokens = parsed["usage"].value("completion_tokens", 0L);
        }
    } catch (const json::exception& e) {
        raise(ErrorKind::Http, std::string("unexpected provider response shape: ") + e.what());
    }
    return response;
}

std::string api_key_from_env() {
    const char* key = std::getenv("CHEX_API_KEY");
    return key ? std::string(key) : std::string();
}

StubChatClient::StubChatClient(MappingLexicon lexicon)
    : StubChatClient(std::move(lexicon), Options{}) {}

StubChatClient::StubChatClient(MappingLexicon lexicon, Options options)
    : lexicon_(std::move(lexicon)), options_(std::move(options)) {}

std::string StubChatClient::describe() const { return "stub"; }

ChatResponse StubChatClient::complete(const ChatRequest& request) {
    // The target report is the last "Report:" block of the rendered prompt.
    constexpr std::string_view kReportCue = "\nReport: ";
    constexpr std::string_view kAnswerCue = "\nAnswer:";
    auto report_at = request.prompt.rfind(kReportCue);
    if (report_at == std::string::npos)
        raise(ErrorKind::Http, "stub provider cannot locate the report in the prompt");
    std::size_t begin = report_at + kReportCue.size();
    std::size_t end = request.prompt.find(kAnswerCue, begin);
    if (end == std::string::npos) end = request.prompt.size();
    std::string report = request.prompt.substr(begin, end - begin);

    if (!options_.poison_token.empty() && report.find(options_.poison_token) != std::string::npos)
        raise(ErrorKind::Http, "stub provider fault (poisoned report)");
    if (options_.fail_attempts_per_report > 0) {
        std::lock_guard lock(mutex_);
        int& calls = calls_per_report_[sha256_hex(report)];
        if (calls++ < options_.fail_attempts_per_report)
            raise(ErrorKind::Http, "stub provider fault (transient)");
    }
    if (options_.delay_ms > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(options_.delay_ms));

    ChatResponse response;
    switch (options_.mode) {
        case PromptMode::ExtractFindings: {
            auto mentions = extract_mentions(report, lexicon_);
            response.text = render_extract_answer(mentions);
            break;
        }
        case PromptMode::DirectCategorize:
            response.text = render_direct_answer(rule_label(report, lexicon_, "", SectionChoice::Findings));
            break;
        case PromptMode::FourStatus:
            response.text =
                render_four_status_answer(rule_label_four_status(report, lexicon_, "", SectionChoice::Findings));
            break;
    }
    response.prompt_tokens = static_cast<long>(request.prompt.size() / 4);
    response.completion_tokens = static_cast<long>(response.text.size() / 4);
    return response;
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) raise(ErrorKind::Io, "cannot create cache directory " + dir_.string());
}

std::string ResponseCache::key_for(const ChatRequest& request) {
    std::ostringstream material;
    material << request.model_id << '\x1f' << request.prompt << '\x1f' << request.temperature
             << '\x1f' << request.max_tokens;
    return sha256_hex(material.str());
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    std::ifstream in(dir_ / key, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void ResponseCache::put(const std::string& key, std::string_view response_text) {
    // Single writer per key: unique temp name, then an atomic rename.
    static std::atomic<unsigned> counter{0};
    std::filesystem::path tmp =
        dir_ / (key + ".tmp." + std::to_string(::getpid()) + "." +
                std::to_string(counter.fetch_add(1)));
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) raise(ErrorKind::Io, "cannot write cache entry " + tmp.string());
        out << response_text;
    }
    std::error_code ec;
    std::filesystem::rename(tmp, dir_ / key, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        raise(ErrorKind::Io, "cannot publish cache entry " + key);
    }
}

}  // namespace chexlab
