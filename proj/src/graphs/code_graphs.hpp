#pragma once

#include "graphs/ast.hpp"
#include "graphs/graphs.hpp"

#include <memory>
#include <string>
#include <vector>

namespace vultriage::graphs {

struct FunctionGraphs {
    AstNode ast; // FunctionDef root
    CfgGraph cfg;
    DfgGraph dfg;
};

// All graphs derived from one source text. A snippet may hold several
// function definitions; each gets its own graph triple, in source order.
struct GraphBundle {
    SourceFunction source;
    std::vector<FunctionGraphs> functions;
};

// A language frontend turns source text into per-function graphs.
class Frontend {
public:
    virtual ~Frontend() = default;
    virtual std::vector<FunctionGraphs> build(const SourceFunction& fn) const = 0;
};

// Thread-safe. Registering an existing language replaces its frontend.
void register_frontend(const std::string& language, std::shared_ptr<const Frontend> frontend);

bool has_frontend(const std::string& language);

// Throws SyntaxError or UnsupportedLanguage.
GraphBundle parse(const SourceFunction& fn);

// Builds the graphs for one parsed C function root.
FunctionGraphs build_function_graphs(AstNode function_root);

} // namespace vultriage::graphs
