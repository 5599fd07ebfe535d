#include "llm/llm_client.hpp"

#include "common/http.hpp"
#include "common/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <thread>

namespace vultriage::llm {

using nlohmann::json;

const char* llm_error_kind_name(LlmErrorKind k)
{
    switch (k) {
    case LlmErrorKind::Timeout: return "timeout";
    case LlmErrorKind::Transport: return "transport";
    case LlmErrorKind::RateLimited: return "rate-limited";
    case LlmErrorKind::BadResponse: return "bad-response";
    }
    return "?";
}

namespace {

std::optional<LlmErrorKind> parse_kind(const std::string& s)
{
    if (s == "timeout")
        return LlmErrorKind::Timeout;
    if (s == "transport")
        return LlmErrorKind::Transport;
    if (s == "rate-limited" || s == "rate_limited")
        return LlmErrorKind::RateLimited;
    if (s == "bad-response" || s == "bad_response")
        return LlmErrorKind::BadResponse;
    return std::nullopt;
}

std::string utc_timestamp()
{
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double seconds_until(Deadline d)
{
    return std::chrono::duration<double>(d - Clock::now()).count();
}

} // namespace

std::string prompt_hash(const std::string& prompt)
{
    return text::hex64(text::fnv1a64(prompt));
}

// ------------------------------------------------------------------ scripted

bool ScriptedBackend::Rule::matches(const std::string& prompt) const
{
    if (prompt.find(contains) == std::string::npos)
        return false;
    return std::all_of(also_contains.begin(), also_contains.end(),
                       [&](const std::string& s) { return prompt.find(s) != std::string::npos; });
}

void ScriptedBackend::add_exact(const std::string& hash, std::string response)
{
    std::lock_guard lock(mu_);
    exact_.emplace_back(hash, std::move(response));
}

void ScriptedBackend::add_rule(Rule rule)
{
    std::lock_guard lock(mu_);
    failures_left_.push_back(rule.fail_times);
    rules_.push_back(std::move(rule));
}

void ScriptedBackend::set_default(std::string response)
{
    std::lock_guard lock(mu_);
    default_ = std::move(response);
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json(const std::string& json_text)
{
    auto b = std::make_shared<ScriptedBackend>();
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw DataError(std::string("mock script: ") + e.what());
    }
    if (j.contains("by_hash"))
        for (const auto& [h, v] : j["by_hash"].items())
            b->add_exact(h, v.get<std::string>());
    if (j.contains("rules")) {
        for (const auto& r : j["rules"]) {
            Rule rule;
            if (r.contains("contains") && r["contains"].is_array()) {
                auto parts = r["contains"].get<std::vector<std::string>>();
                if (!parts.empty()) {
                    rule.contains = parts.front();
                    rule.also_contains.assign(parts.begin() + 1, parts.end());
                }
            } else {
                rule.contains = r.value("contains", std::string());
            }
            rule.response = r.value("response", std::string());
            if (r.contains("fail")) {
                rule.fail = parse_kind(r["fail"].get<std::string>());
                if (!rule.fail)
                    throw DataError("mock script: unknown failure kind '" + r["fail"].get<std::string>() + "'");
            }
            rule.fail_times = r.value("fail_times", -1);
            rule.stall = r.value("stall", false);
            b->add_rule(std::move(rule));
        }
    }
    if (j.contains("default"))
        b->set_default(j["default"].get<std::string>());
    return b;
}

ChatResponse ScriptedBackend::send(const ChatRequest& req, Deadline deadline)
{
    std::string hash = prompt_hash(req.prompt);
    std::optional<std::string> answer;
    bool stall = false;
    std::optional<LlmErrorKind> fail;
    {
        std::lock_guard lock(mu_);
        log_.push_back(req.prompt);
        for (const auto& [h, r] : exact_)
            if (h == hash) {
                answer = r;
                break;
            }
        for (std::size_t i = 0; !answer && i < rules_.size(); ++i) {
            const Rule& rule = rules_[i];
            if (!rule.matches(req.prompt))
                continue;
            if (rule.stall) {
                stall = true;
                break;
            }
            if (rule.fail && failures_left_[i] != 0) {
                if (failures_left_[i] > 0)
                    --failures_left_[i];
                fail = rule.fail;
                break;
            }
            answer = rule.response;
        }
        if (!answer && !stall && !fail)
            answer = default_;
    }
    if (stall) {
        std::this_thread::sleep_until(deadline);
        throw LlmError(LlmErrorKind::Timeout, "scripted backend stalled past the deadline");
    }
    if (fail)
        throw LlmError(*fail, "scripted failure");
    if (!answer)
        throw LlmError(LlmErrorKind::BadResponse, "no scripted response for prompt " + hash);
    return {*answer, 0.0, model_id(), 0};
}

std::vector<std::string> ScriptedBackend::call_log() const
{
    std::lock_guard lock(mu_);
    return log_;
}

std::size_t ScriptedBackend::call_count() const
{
    std::lock_guard lock(mu_);
    return log_.size();
}

void ScriptedBackend::clear_log()
{
    std::lock_guard lock(mu_);
    log_.clear();
}

// ---------------------------------------------------------------------- http

HttpChatBackend::HttpChatBackend(std::string endpoint, std::string model, std::string api_key)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), api_key_(std::move(api_key))
{
}

std::string HttpChatBackend::request_body(const ChatRequest& req) const
{
    json body = {
        {"model", model_},
        {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
        {"temperature", req.temperature},
        {"top_p", req.top_p},
        {"frequency_penalty", req.frequency_penalty},
        {"presence_penalty", req.presence_penalty},
    };
    return body.dump();
}

ChatResponse HttpChatBackend::send(const ChatRequest& req, Deadline deadline)
{
    http::Headers headers;
    if (!api_key_.empty())
        headers.emplace_back("Authorization", "Bearer " + api_key_);
    auto start = Clock::now();
    http::Response res;
    try {
        res = http::post_json(endpoint_, request_body(req), headers, seconds_until(deadline));
    } catch (const http::HttpFailure& e) {
        throw LlmError(e.kind() == http::Failure::Timeout ? LlmErrorKind::Timeout : LlmErrorKind::Transport,
                       e.what());
    }
    double latency = std::chrono::duration<double>(Clock::now() - start).count();
    if (res.status == 429)
        throw LlmError(LlmErrorKind::RateLimited, "HTTP 429");
    if (res.status >= 500)
        throw LlmError(LlmErrorKind::Transport, "HTTP " + std::to_string(res.status));
    if (res.status != 200)
        throw LlmError(LlmErrorKind::BadResponse, "HTTP " + std::to_string(res.status));
    try {
        auto j = json::parse(res.body);
        std::string content = j.at("choices").at(0).at("message").at("content").get<std::string>();
        std::string model = j.value("model", model_);
        return {content, latency, model, 0};
    } catch (const json::exception& e) {
        throw LlmError(LlmErrorKind::BadResponse, std::string("malformed completion: ") + e.what());
    }
}

// -------------------------------------------------------------------- client

ChatClient::ChatClient(std::shared_ptr<Backend> backend, RetryPolicy retry, int max_in_flight,
                       std::optional<std::string> transcript_path)
    : backend_(std::move(backend)),
      retry_(retry),
      max_in_flight_(std::clamp(max_in_flight, 1, 1024)),
      slots_(std::clamp(max_in_flight, 1, 1024)),
      transcript_path_(std::move(transcript_path))
{
    if (retry_.max_attempts < 1)
        retry_.max_attempts = 1;
}

ChatResponse ChatClient::complete(const ChatRequest& req)
{
    ++requests_;
    slots_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{slots_};

    double backoff = retry_.initial_backoff_seconds;
    for (int attempt = 1;; ++attempt) {
        auto start = Clock::now();
        Deadline deadline = start + std::chrono::duration_cast<Clock::duration>(
                                        std::chrono::duration<double>(req.timeout_seconds));
        try {
            ChatResponse res = backend_->send(req, deadline);
            if (Clock::now() > deadline)
                throw LlmError(LlmErrorKind::Timeout, "response arrived after the deadline");
            res.retries = attempt - 1;
            ++successes_;
            if (transcript_path_)
                append_transcript(req, res);
            return res;
        } catch (const LlmError& e) {
            if (!e.retryable() || attempt >= retry_.max_attempts) {
                ++failures_;
                throw;
            }
        }
        ++retries_;
        if (backoff > 0)
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
        backoff *= retry_.backoff_multiplier;
    }
}

Telemetry ChatClient::telemetry() const
{
    return {requests_.load(), successes_.load(), failures_.load(), retries_.load()};
}

void ChatClient::append_transcript(const ChatRequest& req, const ChatResponse& res)
{
    json rec = {
        {"prompt_hash", prompt_hash(req.prompt)},
        {"prompt", req.prompt},
        {"response", res.text},
        {"params",
         {{"temperature", req.temperature},
          {"top_p", req.top_p},
          {"frequency_penalty", req.frequency_penalty},
          {"presence_penalty", req.presence_penalty},
          {"timeout", req.timeout_seconds},
          {"model", res.model_id}}},
        {"timestamp", utc_timestamp()},
    };
    std::lock_guard lock(transcript_mu_);
    std::ofstream out(*transcript_path_, std::ios::app | std::ios::binary);
    if (!out)
        throw IoError("cannot append to transcript '" + *transcript_path_ + "'");
    out << rec.dump() << '\n';
}

} // namespace vultriage::llm
