#include "semantic/semantic_path.hpp"

#include "common/text.hpp"
#include "prompts/prompts.hpp"

namespace vultriage::semantic {

std::string render_explanation_prompt(const graphs::SourceFunction& fn)
{
    return text::substitute(prompts::kSemanticExplanation, {{"Code", fn.code}});
}

SemanticContext generate_explanation(const graphs::SourceFunction& fn, llm::ChatClient& llm,
                                     const llm::ChatRequest& params)
{
    llm::ChatRequest req = params;
    req.prompt = render_explanation_prompt(fn);
    try {
        return {llm.complete(req).text, fn.id, false};
    } catch (const llm::LlmError&) {
        return {"", fn.id, true};
    }
}

} // namespace vultriage::semantic
