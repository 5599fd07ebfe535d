#pragma once

#include "control/control_path.hpp"
#include "graphs/ast.hpp"
#include "knowledge/knowledge_path.hpp"
#include "llm/llm_client.hpp"
#include "semantic/semantic_path.hpp"

#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vultriage::pipeline {

inline constexpr std::string_view kNoStructure = "(structural analysis unavailable)";
inline constexpr std::string_view kNoKnowledge = "(no knowledge retrieved)";
inline constexpr std::string_view kNoExplanation = semantic::kNoExplanation;
inline constexpr std::string_view kVerdictReminder = "Answer with exactly 'Verdict: Yes' or 'Verdict: No'.";

enum class PathId { Control, Knowledge, Semantic };
const char* path_name(PathId p);

struct Instruction {
    std::string code;
    std::string control_info;
    std::string knowledge;
    std::string explain;
    std::string text; // the rendered prompt
};

// Fills the judgment template. Empty augmentation slots receive their
// degradation marker.
Instruction assemble_instruction(const std::string& code, const std::string& control_info,
                                 const std::string& knowledge, const std::string& explain);

// The last line of the form "Verdict: Yes|No" decides, case-insensitively;
// markdown emphasis around either token is ignored. Throws VerdictParseError.
graphs::Label parse_verdict(const std::string& response);

struct Verdict {
    graphs::Label label = graphs::Label::Benign;
    std::string raw;
    std::set<PathId> degraded_paths;
    bool parse_failure = false;
};

struct StageTiming {
    double control = 0, knowledge = 0, semantic = 0, judgment = 0, total = 0;
};

struct TriageResult {
    Verdict verdict;
    StageTiming timing;
    std::vector<std::string> prompt_hashes; // every prompt sent, in order
    std::string instruction_hash;
};

struct TriageConfig {
    control::Level level = control::Level::C;
    knowledge::KnowledgeOptions knowledge;
    llm::ChatRequest inference; // prompt is ignored
};

// Borrowed collaborators; all must outlive the call. A null index or encoder
// degrades the knowledge path.
struct TriageResources {
    llm::ChatClient* llm = nullptr;
    const knowledge::KnowledgeIndex* index = nullptr;
    const knowledge::Encoder* encoder = nullptr;
};

// Control, knowledge and semantic paths, then the judgment call. Path
// failures are absorbed into degraded_paths; an LlmError from the judgment
// call propagates.
TriageResult triage(const graphs::SourceFunction& fn, const TriageResources& res, const TriageConfig& cfg);

// ------------------------------------------------------------------ runner

struct AnalyzeOptions {
    std::string out_path;
    int workers = 4;
    bool resume = false;
    // Written as the first record. Runs resume only against a file whose
    // header carries the same "config_fingerprint".
    std::string header_json;
    std::string config_fingerprint;
    std::function<void(const std::string& id, std::size_t done, std::size_t total)> progress;
};

struct AnalyzeSummary {
    std::size_t total = 0;
    std::size_t analyzed = 0;
    std::size_t skipped = 0; // already present when resuming
    std::size_t failed = 0;  // judgment call failed after retries
};

std::string verdict_record(const std::string& id, const TriageResult& r);

// Writes one JSON Lines record per function in input order: "verdict" on
// success, "error" when the judgment call failed. Per-function timings go to
// "<out_path>.timing". On resume, existing verdict records are kept and their
// functions skipped; error records and any torn final line are dropped.
AnalyzeSummary run_analyze(const std::vector<graphs::SourceFunction>& functions, const TriageResources& res,
                           const TriageConfig& cfg, const AnalyzeOptions& opts);

} // namespace vultriage::pipeline
