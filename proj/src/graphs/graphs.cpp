#include "graphs/graphs.hpp"

namespace vultriage::graphs {

const char* cfg_kind_name(CfgKind k)
{
    switch (k) {
    case CfgKind::Entry: return "entry";
    case CfgKind::Exit: return "exit";
    case CfgKind::Branch: return "branch";
    case CfgKind::Loop: return "loop";
    case CfgKind::Call: return "call";
    case CfgKind::Return: return "return";
    case CfgKind::Statement: return "statement";
    }
    return "?";
}

const char* edge_label_name(EdgeLabel l)
{
    switch (l) {
    case EdgeLabel::True: return "True";
    case EdgeLabel::False: return "False";
    case EdgeLabel::Seq: return "seq";
    }
    return "?";
}

const char* dfg_kind_name(DfgKind k)
{
    switch (k) {
    case DfgKind::Param: return "param";
    case DfgKind::Def: return "def";
    case DfgKind::Use: return "use";
    case DfgKind::Sink: return "sink";
    }
    return "?";
}

std::vector<CfgEdge> CfgGraph::out_edges(int id) const
{
    std::vector<CfgEdge> out;
    for (const auto& e : edges)
        if (e.src == id)
            out.push_back(e);
    return out;
}

std::vector<CfgEdge> CfgGraph::in_edges(int id) const
{
    std::vector<CfgEdge> out;
    for (const auto& e : edges)
        if (e.dst == id)
            out.push_back(e);
    return out;
}

std::vector<int> DfgGraph::successors(int id) const
{
    std::vector<int> out;
    for (const auto& e : edges)
        if (e.src == id)
            out.push_back(e.dst);
    return out;
}

} // namespace vultriage::graphs
