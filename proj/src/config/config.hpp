#pragma once

#include "control/control_path.hpp"
#include "knowledge/encoder.hpp"
#include "knowledge/knowledge_path.hpp"
#include "llm/llm_client.hpp"
#include "pipeline/orchestrator.hpp"

#include <cstdint>
#include <memory>
#include <string>

namespace vultriage::config {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct LlmSettings {
    std::string backend = "http"; // "http" | "scripted"
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4o";
    std::string api_key_env = "VULTRIAGE_API_KEY";
    std::string script; // scripted backend: path to a mock script
    llm::ChatRequest inference;
    llm::RetryPolicy retry;
    int max_in_flight = 4;
    std::string transcript; // empty: no transcript
};

struct EncoderSettings {
    std::string kind = "reference"; // "reference" | "http"
    std::size_t dim = 64;
    std::uint64_t seed = 0x5eed;
    std::string url;
    std::string model;
    double timeout_seconds = 60.0;
};

struct RunConfig {
    control::Level level = control::Level::C;
    knowledge::KnowledgeOptions knowledge;
    std::string kb_path;
    std::uint64_t seed = 0;
    int workers = 4;
    LlmSettings llm;
    EncoderSettings encoder;
};

// Versioned JSON file; every key is optional and overrides the default.
// Unknown keys and a schema_version other than 1 are usage errors.
void apply_json(RunConfig& cfg, const std::string& json_text);
RunConfig load_config_file(const std::string& path);

// Effective configuration as JSON (no secrets).
std::string to_json(const RunConfig& cfg);

// Hash over the settings that influence verdicts; worker count, in-flight cap
// and transcript path are excluded so runs may resume with different ones.
std::string fingerprint(const RunConfig& cfg);

std::unique_ptr<knowledge::Encoder> make_encoder(const EncoderSettings& s);

// The API key is read from the environment variable named in the settings.
std::shared_ptr<llm::Backend> make_backend(const LlmSettings& s);

std::unique_ptr<llm::ChatClient> make_client(const LlmSettings& s);

pipeline::TriageConfig triage_config(const RunConfig& cfg);

} // namespace vultriage::config
