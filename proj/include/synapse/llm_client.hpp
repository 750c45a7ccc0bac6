#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "synapse/error.hpp"
#include "synapse/prompt.hpp"
#include "synapse/util.hpp"

namespace synapse {

enum class BackendKind { mock, http };

struct BackendDescriptor {
    BackendKind kind = BackendKind::mock;
    std::string endpoint;    // http only
    std::string model_name;  // http only
    double temperature = 0.0;
    int max_tokens = 128;
    std::chrono::milliseconds timeout{30000};
    int max_in_flight = 4;
    int retry_limit = 2;
    std::chrono::milliseconds backoff_base{100};
    std::string api_key; // sent as a bearer token when non-empty

    void validate() const {
        if (kind == BackendKind::http) {
            if (endpoint.empty()) throw ConfigError("http backend requires an endpoint");
            if (model_name.empty()) throw ConfigError("http backend requires a model name");
        }
        if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
        if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
        if (retry_limit < 0) throw ConfigError("retry_limit must be >= 0");
    }
};

struct GenerationResult {
    std::string caption; // single line, unquoted, no "Output:" prefix
    std::string raw;
    std::string backend;
    std::chrono::milliseconds latency{0};
    int attempts = 0;
};

/// Normalizes a raw generation into a single-line caption: trims, drops a
/// leading "Output:" label, strips matching surrounding quotes, collapses
/// newline runs to single spaces. The pass repeats until stable, so the
/// result is a fixed point. Empty results are an error.
inline std::string postprocess(const std::string& raw) {
    std::string s = raw;
    for (int guard = 0; guard < 16; ++guard) {
        const std::string before = s;
        s = std::string(util::trim(s));
        if (s.rfind("Output:", 0) == 0) s = std::string(util::trim(s.substr(7)));
        if (s.size() >= 2 &&
            ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
            s = std::string(util::trim(s.substr(1, s.size() - 2)));
        std::string collapsed;
        collapsed.reserve(s.size());
        for (std::size_t i = 0; i < s.size();) {
            if (std::isspace(static_cast<unsigned char>(s[i]))) {
                std::size_t j = i;
                bool has_newline = false;
                while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) {
                    if (s[j] == '\n' || s[j] == '\r') has_newline = true;
                    ++j;
                }
                if (has_newline)
                    collapsed += ' ';
                else
                    collapsed.append(s, i, j - i);
                i = j;
            } else {
                collapsed += s[i++];
            }
        }
        s = std::move(collapsed);
        if (s == before) break;
    }
    if (s.empty()) throw DataError("postprocess: empty output");
    return s;
}

struct TransportResponse {
    int status = 0; // 0 means the request never completed (network failure)
    std::string body;
};

/// Transport seam for the http backend; tests inject instrumented fakes.
class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportResponse post_json(const std::string& endpoint, const std::string& body,
                                        std::chrono::milliseconds timeout,
                                        const std::string& api_key) = 0;
};

namespace detail {

/// Counting gate bounding concurrent transport calls.
class ConcurrencyGate {
public:
    explicit ConcurrencyGate(int limit) : available_(limit) {}

    class Slot {
    public:
        explicit Slot(ConcurrencyGate& gate) : gate_(&gate) {}
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;
        ~Slot() {
            std::lock_guard lock(gate_->mu_);
            ++gate_->available_;
            gate_->cv_.notify_one();
        }

    private:
        ConcurrencyGate* gate_;
    };

    Slot acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return available_ > 0; });
        --available_;
        return Slot(*this);
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int available_;
};

/// Deterministic mock rule: read the keyword block and echo the first one or
/// two words as a stock caption.
inline std::string mock_generate(const std::string& prompt_text) {
    const std::string header = "[Denoised Brain-Signal Keywords]";
    const auto pos = prompt_text.find(header);
    if (pos == std::string::npos)
        throw DataError("mock backend: prompt has no keyword block");
    const auto line_start = prompt_text.find('\n', pos);
    if (line_start == std::string::npos)
        throw DataError("mock backend: keyword block is truncated");
    auto line_end = prompt_text.find('\n', line_start + 1);
    if (line_end == std::string::npos) line_end = prompt_text.size();
    std::string line(util::trim(prompt_text.substr(line_start + 1, line_end - line_start - 1)));
    if (line.size() < 2 || line.front() != '[' || line.back() != ']')
        throw DataError("mock backend: malformed keyword line '" + line + "'");
    line = line.substr(1, line.size() - 2);

    std::vector<std::string> words;
    std::size_t start = 0;
    while (start <= line.size() && !line.empty()) {
        auto comma = line.find(", ", start);
        if (comma == std::string::npos) {
            words.emplace_back(util::trim(std::string_view(line).substr(start)));
            break;
        }
        words.emplace_back(util::trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 2;
    }
    words.erase(std::remove(words.begin(), words.end(), std::string{}), words.end());
    if (words.empty()) return {};
    if (words.size() == 1) return "a photo of " + words[0];
    return "a photo of " + words[0] + " and " + words[1];
}

inline bool transient_status(int status) {
    return status == 0 || status == 408 || status == 429 || status >= 500;
}

/// Pulls the generated text out of a chat-completion style response body.
inline std::string extract_generation(const std::string& body) {
    nlohmann::json payload;
    try {
        payload = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& ex) {
        throw TransportError(std::string("backend returned unparseable JSON: ") + ex.what(), 200);
    }
    if (payload.contains("choices") && payload["choices"].is_array() && !payload["choices"].empty()) {
        const auto& choice = payload["choices"][0];
        if (choice.contains("message") && choice["message"].contains("content") &&
            choice["message"]["content"].is_string())
            return choice["message"]["content"].get<std::string>();
        if (choice.contains("text") && choice["text"].is_string())
            return choice["text"].get<std::string>();
    }
    for (const char* key : {"content", "text", "output"})
        if (payload.contains(key) && payload[key].is_string())
            return payload[key].get<std::string>();
    throw TransportError("backend response carries no generation text", 200);
}

} // namespace detail

/// Routes rendered prompts to the configured decoder backend. Shareable
/// across threads; concurrent generate() calls are capped at
/// `max_in_flight` simultaneous transport requests.
class LlmClient {
public:
    using Logger = std::function<void(const nlohmann::json&)>;

    explicit LlmClient(BackendDescriptor descriptor, std::shared_ptr<Transport> transport = nullptr,
                       Logger logger = nullptr)
        : descriptor_(std::move(descriptor)),
          transport_(std::move(transport)),
          logger_(std::move(logger)),
          gate_(std::max(1, descriptor_.max_in_flight)) {
        descriptor_.validate();
        if (descriptor_.kind == BackendKind::http && !transport_)
            throw ConfigError("http backend requires a transport");
    }

    const BackendDescriptor& descriptor() const { return descriptor_; }

    GenerationResult generate(const RenderedPrompt& prompt) {
        const auto started = std::chrono::steady_clock::now();
        GenerationResult result;
        if (descriptor_.kind == BackendKind::mock) {
            result.raw = detail::mock_generate(prompt.text);
            result.backend = "mock";
            result.attempts = 1;
        } else {
            result.raw = http_generate(prompt, result.attempts);
            result.backend = descriptor_.model_name;
        }
        result.caption = postprocess(result.raw);
        result.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        return result;
    }

private:
    std::string http_generate(const RenderedPrompt& prompt, int& attempts) {
        const nlohmann::json request = {
            {"model", descriptor_.model_name},
            {"messages", nlohmann::json::array({nlohmann::json{{"role", "user"}, {"content", prompt.text}}})},
            {"temperature", descriptor_.temperature},
            {"max_tokens", descriptor_.max_tokens},
        };
        const std::string body = request.dump();

        const int max_attempts = descriptor_.retry_limit + 1;
        int last_status = 0;
        std::string last_message;
        for (attempts = 1; attempts <= max_attempts; ++attempts) {
            TransportResponse response;
            {
                auto slot = gate_.acquire();
                response = transport_->post_json(descriptor_.endpoint, body, descriptor_.timeout,
                                                 descriptor_.api_key);
            }
            log({{"event", "request"}, {"endpoint", descriptor_.endpoint}, {"model", descriptor_.model_name},
                 {"attempt", attempts}, {"status", response.status}});
            if (response.status == 200) return detail::extract_generation(response.body);
            last_status = response.status;
            last_message = response.body;
            if (!detail::transient_status(response.status))
                throw TransportError("backend returned status " + std::to_string(response.status) +
                                         ": " + response.body,
                                     response.status);
            if (attempts < max_attempts)
                std::this_thread::sleep_for(descriptor_.backoff_base * (1 << (attempts - 1)));
        }
        throw TransportError("backend failed after " + std::to_string(max_attempts) +
                                 " attempts (last status " + std::to_string(last_status) + "): " + last_message,
                             last_status);
    }

    void log(nlohmann::json record) {
        if (logger_) logger_(record);
    }

    BackendDescriptor descriptor_;
    std::shared_ptr<Transport> transport_;
    Logger logger_;
    detail::ConcurrencyGate gate_;
};

} // namespace synapse
