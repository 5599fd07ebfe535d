#pragma once

#include "graphs/ast.hpp"
#include "graphs/graphs.hpp"

#include <vector>

namespace vultriage::graphs {

// Which AST fragments a CFG node evaluates. Headers of branches and loops
// list their parts in evaluation order (for: init, cond, step).
struct NodeOrigin {
    enum class Mode { None, Param, Statement, Header };
    Mode mode = Mode::None;
    std::vector<const AstNode*> parts;
};

struct CfgBuild {
    CfgGraph graph;
    std::vector<NodeOrigin> origins; // indexed by CFG node id
};

// The returned origins point into `fn`, which must outlive the result.
CfgBuild build_cfg(const AstNode& fn);

DfgGraph build_dfg(const AstNode& fn, const CfgBuild& cfg);

// Statement label used for CFG nodes and DFG use/sink nodes.
std::string statement_label(const AstNode& stmt);

} // namespace vultriage::graphs
