#pragma once

#include <string>
#include <vector>

namespace vultriage::graphs {

enum class CfgKind { Entry, Exit, Branch, Loop, Call, Return, Statement };
enum class EdgeLabel { True, False, Seq };

const char* cfg_kind_name(CfgKind k);
const char* edge_label_name(EdgeLabel l);

struct CfgNode {
    int id = 0;
    CfgKind kind = CfgKind::Statement;
    std::string label;
    int line = 0;
};

struct CfgEdge {
    int src = 0;
    int dst = 0;
    EdgeLabel label = EdgeLabel::Seq;

    friend bool operator==(const CfgEdge&, const CfgEdge&) = default;
};

// Node ids are dense: nodes[i].id == i. Entry is node 0; exit_id names the exit.
struct CfgGraph {
    std::vector<CfgNode> nodes;
    std::vector<CfgEdge> edges;
    int entry_id = 0;
    int exit_id = 0;

    std::vector<CfgEdge> out_edges(int id) const;
    std::vector<CfgEdge> in_edges(int id) const;
    const CfgNode& node(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
};

enum class DfgKind { Param, Def, Use, Sink };

const char* dfg_kind_name(DfgKind k);

struct DfgNode {
    int id = 0;
    std::string var;
    DfgKind kind = DfgKind::Use;
    int line = 0;
    std::string label;
    int stmt = 0; // id of the CFG node the occurrence belongs to
};

struct DfgEdge {
    int src = 0;
    int dst = 0;

    friend bool operator==(const DfgEdge&, const DfgEdge&) = default;
    friend auto operator<=>(const DfgEdge&, const DfgEdge&) = default;
};

struct DfgGraph {
    std::vector<DfgNode> nodes; // nodes[i].id == i
    std::vector<DfgEdge> edges; // sorted, unique

    std::vector<int> successors(int id) const;
    const DfgNode& node(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
};

} // namespace vultriage::graphs
