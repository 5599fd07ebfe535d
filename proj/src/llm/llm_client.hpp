#pragma once

#include "common/error.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

namespace vultriage::llm {

enum class LlmErrorKind { Timeout, Transport, RateLimited, BadResponse };

const char* llm_error_kind_name(LlmErrorKind k);

class LlmError : public Error {
public:
    LlmError(LlmErrorKind kind, const std::string& msg)
        : Error(ErrorCode::Llm, std::string(llm_error_kind_name(kind)) + ": " + msg), kind_(kind) {}
    LlmErrorKind kind() const { return kind_; }
    bool retryable() const { return kind_ != LlmErrorKind::BadResponse; }

private:
    LlmErrorKind kind_;
};

// Inference parameters; defaults are the evaluation configuration.
struct ChatRequest {
    std::string prompt;
    double temperature = 0.7;
    double top_p = 1.0;
    double frequency_penalty = 0.0;
    double presence_penalty = 0.0;
    double timeout_seconds = 300.0;
};

struct ChatResponse {
    std::string text;
    double latency_seconds = 0.0;
    std::string model_id;
    int retries = 0;
};

using Clock = std::chrono::steady_clock;
using Deadline = Clock::time_point;

std::string prompt_hash(const std::string& prompt);

// A chat-completion transport. Implementations must be thread-safe and should
// give up with LlmError{Timeout} once `deadline` passes.
class Backend {
public:
    virtual ~Backend() = default;
    virtual ChatResponse send(const ChatRequest& req, Deadline deadline) = 0;
    virtual std::string model_id() const = 0;
};

// Deterministic responses keyed by exact prompt hash, then by the first
// matching substring rule, then a default. Rules may also inject failures.
class ScriptedBackend final : public Backend {
public:
    struct Rule {
        std::string contains;
        std::string response;
        std::optional<LlmErrorKind> fail; // raise instead of answering
        int fail_times = -1;              // -1: always; otherwise fail this many times, then answer
        bool stall = false;               // block until the deadline, then time out
        std::vector<std::string> also_contains; // further substrings that must all be present

        bool matches(const std::string& prompt) const;
    };

    ScriptedBackend() = default;

    void add_exact(const std::string& hash, std::string response);
    void add_rule(Rule rule);
    void set_default(std::string response);

    // {"by_hash": {hex: text}, "rules": [{"contains", "response", "fail",
    //  "fail_times", "stall"}], "default": text}. "contains" may be a string
    // or an array of strings that must all occur.
    static std::shared_ptr<ScriptedBackend> from_json(const std::string& json_text);

    ChatResponse send(const ChatRequest& req, Deadline deadline) override;
    std::string model_id() const override { return "scripted"; }

    std::vector<std::string> call_log() const;
    std::size_t call_count() const;
    void clear_log();

private:
    mutable std::mutex mu_;
    std::vector<std::pair<std::string, std::string>> exact_;
    std::vector<Rule> rules_;
    std::vector<int> failures_left_;
    std::optional<std::string> default_;
    std::vector<std::string> log_;
};

// OpenAI-compatible chat completions endpoint with bearer authentication.
class HttpChatBackend final : public Backend {
public:
    HttpChatBackend(std::string endpoint, std::string model, std::string api_key);
    ChatResponse send(const ChatRequest& req, Deadline deadline) override;
    std::string model_id() const override { return model_; }

    // Request body sent for `req`; exposed for tests.
    std::string request_body(const ChatRequest& req) const;

private:
    std::string endpoint_;
    std::string model_;
    std::string api_key_;
};

// Adapts a plain function, e.g. a host-language callback.
class FunctionBackend final : public Backend {
public:
    using Fn = std::function<ChatResponse(const ChatRequest&, Deadline)>;
    FunctionBackend(Fn fn, std::string model_id) : fn_(std::move(fn)), model_(std::move(model_id)) {}
    ChatResponse send(const ChatRequest& req, Deadline deadline) override { return fn_(req, deadline); }
    std::string model_id() const override { return model_; }

private:
    Fn fn_;
    std::string model_;
};

struct RetryPolicy {
    int max_attempts = 3;
    double initial_backoff_seconds = 1.0;
    double backoff_multiplier = 2.0;
};

struct Telemetry {
    std::uint64_t requests = 0;
    std::uint64_t successes = 0;
    std::uint64_t failures = 0;
    std::uint64_t retries = 0;
};

// Thread-safe front end: retries, per-attempt timeout, an in-flight cap and
// an optional append-only transcript.
class ChatClient {
public:
    ChatClient(std::shared_ptr<Backend> backend, RetryPolicy retry = {}, int max_in_flight = 4,
               std::optional<std::string> transcript_path = std::nullopt);

    // Throws LlmError after the final failed attempt.
    ChatResponse complete(const ChatRequest& req);

    Telemetry telemetry() const;
    Backend& backend() { return *backend_; }
    int max_in_flight() const { return max_in_flight_; }

private:
    void append_transcript(const ChatRequest& req, const ChatResponse& res);

    std::shared_ptr<Backend> backend_;
    RetryPolicy retry_;
    int max_in_flight_;
    std::counting_semaphore<1024> slots_;
    std::optional<std::string> transcript_path_;
    std::mutex transcript_mu_;
    std::atomic<std::uint64_t> requests_{0}, successes_{0}, failures_{0}, retries_{0};
};

} // namespace vultriage::llm
