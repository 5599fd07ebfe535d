#pragma once

#include "graphs/code_graphs.hpp"

#include <string>
#include <vector>

namespace vultriage::control {

enum class Level { A, B, C };

// Budget shared by path count and chain length.
int budget(Level level);
const char* level_name(Level level);
// Accepts "A"/"B"/"C" in any case; throws UsageError otherwise.
Level parse_level(const std::string& s);

struct Granularity {
    Level level = Level::C;
    int b = 16;

    static Granularity of(Level level) { return {level, budget(level)}; }
};

// ----------------------------------------------------------------- filters

// Keeps retained kinds and lifts the children of removed nodes to their
// nearest retained ancestor. The function root is always kept.
graphs::AstNode filter_ast(const graphs::AstNode& ast, Level level);

// Retains entry, exit, branch, loop, call and return nodes; each maximal run
// of plain statements collapses into a single edge carrying the label of the
// edge that entered the run. The same skeleton is used at every level.
graphs::CfgGraph filter_cfg(const graphs::CfgGraph& cfg, Level level);

// Drops same-statement edges and edges not reachable from a parameter node.
// Parameter nodes are always kept.
graphs::DfgGraph filter_dfg(const graphs::DfgGraph& dfg, Level level);

// ------------------------------------------------------------ salient views

struct AstView {
    std::string name;
    int line = 0;
    graphs::CategoryCounts counts;
    std::vector<std::string> calls;      // distinct, first-occurrence order
    std::vector<std::string> conditions; // branch and loop headers
    std::vector<std::string> returns;    // return expressions
    std::string shape;                   // preorder kind sequence
    int represents = 1;                  // >1 when isomorphic functions were collapsed
};

struct CfgPath {
    std::vector<int> nodes;                 // entry ... exit
    std::vector<graphs::EdgeLabel> labels;  // labels[i] is the edge nodes[i] -> nodes[i+1]

    int priority(const graphs::CfgGraph& g) const;
};

struct CfgView {
    std::string name;
    int total_nodes = 0;
    graphs::CfgGraph graph; // filtered
    std::vector<CfgPath> paths;
};

struct Chain {
    std::vector<int> nodes; // param ... sink
    bool truncated = false;
};

struct DfgView {
    std::string name;
    int total_edges = 0;
    graphs::DfgGraph graph; // filtered
    std::vector<int> sources; // param node ids with a retained out-edge, sorted by name
    std::vector<Chain> chains;
};

struct SalientViews {
    std::vector<AstView> ast_views;
    std::vector<CfgView> cfg_views;
    std::vector<DfgView> dfg_views;
};

// One summary per filtered function root; isomorphic roots collapse into the
// first one, which records how many it represents.
std::vector<AstView> aggregate_ast(const std::vector<graphs::AstNode>& filtered_roots);

// Upper bound on explored entry-to-exit paths before selection.
inline constexpr std::size_t kPathExplorationCap = 4096;

// At most `b` entry-to-exit paths, chosen by priority (branch, loop and call
// occurrences, descending; ties by node-id sequence). Every loop back-edge is
// taken at most once per path. The result is in presentation order: lexicographic
// over (node id, edge label) steps, so a True branch precedes its False twin.
std::vector<CfgPath> enumerate_paths(const graphs::CfgGraph& cfg, int b);

// Def-use chains from each parameter to the first sink, at most `b` hops and
// at most `b` chains. A parameter without a complete chain but with a path
// toward a sink cut by the budget yields one truncated chain.
std::vector<Chain> trace_chains(const graphs::DfgGraph& dfg, int b);

SalientViews extract_views(const graphs::GraphBundle& bundle, Granularity g);

// --------------------------------------------------------------- rendering

struct StructuralContext {
    std::string t_ast;
    std::string t_cfg;
    std::string t_dfg;
    std::string s; // t_ast, t_cfg, t_dfg joined by newlines
};

StructuralContext verbalize(const SalientViews& views);

// parse -> filter -> views -> verbalize. Propagates SyntaxError.
StructuralContext generate_structural_context(const graphs::SourceFunction& fn,
                                              Level level = Level::C);

} // namespace vultriage::control
