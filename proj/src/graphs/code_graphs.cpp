#include "graphs/code_graphs.hpp"

#include "common/error.hpp"
#include "common/text.hpp"
#include "graphs/builders.hpp"
#include "graphs/c_parser.hpp"

#include <map>
#include <mutex>
#include <shared_mutex>

namespace vultriage::graphs {

namespace {

class CFrontend final : public Frontend {
public:
    std::vector<FunctionGraphs> build(const SourceFunction& fn) const override
    {
        std::vector<FunctionGraphs> out;
        for (auto& root : c::parse_functions(fn.code))
            out.push_back(build_function_graphs(std::move(root)));
        return out;
    }
};

struct Registry {
    std::shared_mutex mu;
    std::map<std::string, std::shared_ptr<const Frontend>> frontends;

    Registry() { frontends.emplace("c", std::make_shared<CFrontend>()); }
};

Registry& registry()
{
    static Registry r;
    return r;
}

} // namespace

void register_frontend(const std::string& language, std::shared_ptr<const Frontend> frontend)
{
    auto& r = registry();
    std::unique_lock lock(r.mu);
    r.frontends[text::to_lower(language)] = std::move(frontend);
}

bool has_frontend(const std::string& language)
{
    auto& r = registry();
    std::shared_lock lock(r.mu);
    return r.frontends.count(text::to_lower(language)) > 0;
}

FunctionGraphs build_function_graphs(AstNode function_root)
{
    FunctionGraphs fg;
    fg.ast = std::move(function_root);
    CfgBuild cb = build_cfg(fg.ast);
    fg.dfg = build_dfg(fg.ast, cb);
    fg.cfg = std::move(cb.graph);
    return fg;
}

GraphBundle parse(const SourceFunction& fn)
{
    std::shared_ptr<const Frontend> frontend;
    {
        auto& r = registry();
        std::shared_lock lock(r.mu);
        auto it = r.frontends.find(text::to_lower(fn.language.empty() ? "c" : fn.language));
        if (it == r.frontends.end())
            throw UnsupportedLanguage(fn.language);
        frontend = it->second;
    }
    GraphBundle bundle;
    bundle.source = fn;
    bundle.functions = frontend->build(fn);
    if (bundle.functions.empty())
        throw SyntaxError("no function definition found", 1, 1);
    return bundle;
}

} // namespace vultriage::graphs
