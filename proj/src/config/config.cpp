#include "config/config.hpp"

#include "common/error.hpp"
#include "common/text.hpp"

#include <json.hpp>

#include <cstdlib>
#include <set>

namespace vultriage::config {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object())
        throw UsageError("config: '" + where + "' must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k))
            throw UsageError("config: unknown key '" + (where.empty() ? k : where + "." + k) + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out)
{
    if (j.contains(key))
        out = j[key].get<T>();
}

void validate(const RunConfig& c)
{
    if (!(c.knowledge.alpha >= 0.0 && c.knowledge.alpha <= 1.0))
        throw UsageError("config: knowledge.alpha must lie in [0, 1]");
    if (c.knowledge.k < 1 || c.knowledge.max_entries < 1)
        throw UsageError("config: knowledge.k and knowledge.max_entries must be at least 1");
    if (c.workers < 1 || c.llm.max_in_flight < 1)
        throw UsageError("config: workers and llm.max_in_flight must be at least 1");
    if (c.llm.backend != "http" && c.llm.backend != "scripted")
        throw UsageError("config: llm.backend must be 'http' or 'scripted'");
    if (c.encoder.kind != "reference" && c.encoder.kind != "http")
        throw UsageError("config: encoder.kind must be 'reference' or 'http'");
    if (c.llm.inference.timeout_seconds <= 0)
        throw UsageError("config: llm.timeout_seconds must be positive");
    if (c.llm.retry.max_attempts < 1)
        throw UsageError("config: llm.max_attempts must be at least 1");
    if (c.encoder.dim < 1)
        throw UsageError("config: encoder.dim must be at least 1");
}

json to_json_object(const RunConfig& c, bool for_fingerprint)
{
    const auto& inf = c.llm.inference;
    json llm = {
        {"backend", c.llm.backend},
        {"endpoint", c.llm.endpoint},
        {"model", c.llm.model},
        {"api_key_env", c.llm.api_key_env},
        {"script", c.llm.script},
        {"temperature", inf.temperature},
        {"top_p", inf.top_p},
        {"frequency_penalty", inf.frequency_penalty},
        {"presence_penalty", inf.presence_penalty},
        {"timeout_seconds", inf.timeout_seconds},
        {"max_attempts", c.llm.retry.max_attempts},
        {"initial_backoff_seconds", c.llm.retry.initial_backoff_seconds},
        {"backoff_multiplier", c.llm.retry.backoff_multiplier},
    };
    json j = {
        {"schema_version", kSchemaVersion},
        {"level", control::level_name(c.level)},
        {"kb", c.kb_path},
        {"seed", c.seed},
        {"knowledge",
         {{"alpha", c.knowledge.alpha},
          {"k", c.knowledge.k},
          {"max_entries", c.knowledge.max_entries},
          {"example_chars", c.knowledge.example_chars}}},
        {"encoder",
         {{"kind", c.encoder.kind},
          {"dim", c.encoder.dim},
          {"seed", c.encoder.seed},
          {"url", c.encoder.url},
          {"model", c.encoder.model},
          {"timeout_seconds", c.encoder.timeout_seconds}}},
    };
    if (!for_fingerprint) {
        j["workers"] = c.workers;
        llm["max_in_flight"] = c.llm.max_in_flight;
        llm["transcript"] = c.llm.transcript;
    }
    j["llm"] = llm;
    return j;
}

} // namespace

void apply_json(RunConfig& c, const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    try {
        check_keys(j, "", {"schema_version", "level", "kb", "seed", "workers", "knowledge", "llm", "encoder"});
        int version = j.value("schema_version", kSchemaVersion);
        if (version != kSchemaVersion)
            throw UsageError("config: unsupported schema_version " + std::to_string(version) + " (expected " +
                             std::to_string(kSchemaVersion) + ")");
        if (j.contains("level"))
            c.level = control::parse_level(j["level"].get<std::string>());
        read(j, "kb", c.kb_path);
        read(j, "seed", c.seed);
        read(j, "workers", c.workers);
        if (j.contains("knowledge")) {
            const auto& k = j["knowledge"];
            check_keys(k, "knowledge", {"alpha", "k", "max_entries", "example_chars"});
            read(k, "alpha", c.knowledge.alpha);
            read(k, "k", c.knowledge.k);
            read(k, "max_entries", c.knowledge.max_entries);
            read(k, "example_chars", c.knowledge.example_chars);
        }
        if (j.contains("llm")) {
            const auto& l = j["llm"];
            check_keys(l, "llm",
                       {"backend", "endpoint", "model", "api_key_env", "script", "temperature", "top_p",
                        "frequency_penalty", "presence_penalty", "timeout_seconds", "max_attempts",
                        "initial_backoff_seconds", "backoff_multiplier", "max_in_flight", "transcript"});
            read(l, "backend", c.llm.backend);
            read(l, "endpoint", c.llm.endpoint);
            read(l, "model", c.llm.model);
            read(l, "api_key_env", c.llm.api_key_env);
            read(l, "script", c.llm.script);
            read(l, "temperature", c.llm.inference.temperature);
            read(l, "top_p", c.llm.inference.top_p);
            read(l, "frequency_penalty", c.llm.inference.frequency_penalty);
            read(l, "presence_penalty", c.llm.inference.presence_penalty);
            read(l, "timeout_seconds", c.llm.inference.timeout_seconds);
            read(l, "max_attempts", c.llm.retry.max_attempts);
            read(l, "initial_backoff_seconds", c.llm.retry.initial_backoff_seconds);
            read(l, "backoff_multiplier", c.llm.retry.backoff_multiplier);
            read(l, "max_in_flight", c.llm.max_in_flight);
            read(l, "transcript", c.llm.transcript);
        }
        if (j.contains("encoder")) {
            const auto& e = j["encoder"];
            check_keys(e, "encoder", {"kind", "dim", "seed", "url", "model", "timeout_seconds"});
            read(e, "kind", c.encoder.kind);
            read(e, "dim", c.encoder.dim);
            read(e, "seed", c.encoder.seed);
            read(e, "url", c.encoder.url);
            read(e, "model", c.encoder.model);
            read(e, "timeout_seconds", c.encoder.timeout_seconds);
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    validate(c);
}

RunConfig load_config_file(const std::string& path)
{
    RunConfig c;
    apply_json(c, text::read_file(path));
    return c;
}

std::string to_json(const RunConfig& c)
{
    return to_json_object(c, false).dump();
}

std::string fingerprint(const RunConfig& c)
{
    return text::hex64(text::fnv1a64(to_json_object(c, true).dump()));
}

std::unique_ptr<knowledge::Encoder> make_encoder(const EncoderSettings& s)
{
    if (s.kind == "http") {
        if (s.url.empty())
            throw UsageError("encoder.url is required for the http encoder");
        return std::make_unique<knowledge::HttpEncoder>(s.url, s.model, s.dim, s.timeout_seconds);
    }
    return std::make_unique<knowledge::ReferenceEncoder>(s.dim, s.seed);
}

std::shared_ptr<llm::Backend> make_backend(const LlmSettings& s)
{
    if (s.backend == "scripted") {
        if (s.script.empty())
            throw UsageError("llm.script is required for the scripted backend");
        return llm::ScriptedBackend::from_json(text::read_file(s.script));
    }
    const char* key = std::getenv(s.api_key_env.c_str());
    return std::make_shared<llm::HttpChatBackend>(s.endpoint, s.model, key ? key : "");
}

std::unique_ptr<llm::ChatClient> make_client(const LlmSettings& s)
{
    std::optional<std::string> transcript;
    if (!s.transcript.empty())
        transcript = s.transcript;
    return std::make_unique<llm::ChatClient>(make_backend(s), s.retry, s.max_in_flight, transcript);
}

pipeline::TriageConfig triage_config(const RunConfig& c)
{
    pipeline::TriageConfig t;
    t.level = c.level;
    t.knowledge = c.knowledge;
    t.inference = c.llm.inference;
    return t;
}

} // namespace vultriage::config
