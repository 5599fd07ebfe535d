#pragma once

#include "graphs/ast.hpp"
#include "llm/llm_client.hpp"

#include <string>
#include <string_view>

namespace vultriage::semantic {

inline constexpr std::string_view kNoExplanation = "(no explanation available)";

struct SemanticContext {
    std::string text;
    std::string source_fn;
    bool degraded = false;
};

std::string render_explanation_prompt(const graphs::SourceFunction& fn);

// One LLM call; the response is kept verbatim. An LlmError yields an empty,
// degraded context instead of propagating.
SemanticContext generate_explanation(const graphs::SourceFunction& fn, llm::ChatClient& llm,
                                     const llm::ChatRequest& params = {});

} // namespace vultriage::semantic
