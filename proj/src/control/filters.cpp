#include "control/control_path.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace vultriage::control {

using graphs::AstKind;
using graphs::AstNode;
using graphs::CfgGraph;
using graphs::CfgKind;
using graphs::DfgGraph;
using graphs::DfgKind;

int budget(Level level)
{
    switch (level) {
    case Level::A: return 4;
    case Level::B: return 8;
    case Level::C: return 16;
    }
    return 16;
}

const char* level_name(Level level)
{
    switch (level) {
    case Level::A: return "A";
    case Level::B: return "B";
    case Level::C: return "C";
    }
    return "C";
}

Level parse_level(const std::string& s)
{
    if (s == "A" || s == "a")
        return Level::A;
    if (s == "B" || s == "b")
        return Level::B;
    if (s == "C" || s == "c")
        return Level::C;
    throw UsageError("unknown granularity level '" + s + "' (expected A, B or C)");
}

namespace {

bool is_key_operator(const AstNode& n)
{
    static const std::set<std::string> binary = {
        "==", "!=", "<", ">", "<=", ">=", "+", "-", "*", "/", "%", "<<", ">>", "[]"};
    static const std::set<std::string> unary = {
        "*", "&", "-", "+", "++", "--", "p++", "p--", "sizeof"};
    if (n.kind != AstKind::Operator)
        return false;
    if (n.children.size() >= 2)
        return binary.count(n.name) > 0;
    return unary.count(n.name) > 0;
}

bool retained(const AstNode& n, Level level)
{
    if (graphs::is_type_expansion(n.kind))
        return false;
    switch (n.kind) {
    case AstKind::FunctionDef:
    case AstKind::Branch:
    case AstKind::Loop:
    case AstKind::Call:
    case AstKind::Return:
        return true;
    default:
        break;
    }
    if (level == Level::A)
        return false;
    if (n.kind == AstKind::Assignment || n.kind == AstKind::Declaration ||
        n.kind == AstKind::ParamList || is_key_operator(n))
        return true;
    return level == Level::C;
}

void lift(const AstNode& n, Level level, std::vector<AstNode>& out)
{
    if (retained(n, level)) {
        AstNode copy;
        copy.kind = n.kind;
        copy.role = n.role;
        copy.name = n.name;
        copy.text = n.text;
        copy.line = n.line;
        copy.column = n.column;
        copy.has_initializer = n.has_initializer;
        for (const auto& c : n.children)
            lift(c, level, copy.children);
        out.push_back(std::move(copy));
        return;
    }
    for (const auto& c : n.children)
        lift(c, level, out);
}

bool retained_cfg(CfgKind k)
{
    return k != CfgKind::Statement;
}

} // namespace

AstNode filter_ast(const AstNode& ast, Level level)
{
    AstNode root;
    root.kind = ast.kind;
    root.role = ast.role;
    root.name = ast.name;
    root.text = ast.text;
    root.line = ast.line;
    root.column = ast.column;
    root.has_initializer = ast.has_initializer;
    for (const auto& c : ast.children)
        lift(c, level, root.children);
    return root;
}

CfgGraph filter_cfg(const CfgGraph& cfg, Level /*level*/)
{
    std::vector<int> remap(cfg.nodes.size(), -1);
    CfgGraph out;
    for (const auto& n : cfg.nodes) {
        if (!retained_cfg(n.kind))
            continue;
        int id = static_cast<int>(out.nodes.size());
        remap[static_cast<std::size_t>(n.id)] = id;
        graphs::CfgNode copy = n;
        copy.id = id;
        out.nodes.push_back(std::move(copy));
    }
    std::vector<std::vector<graphs::CfgEdge>> succ(cfg.nodes.size());
    for (const auto& e : cfg.edges)
        succ[static_cast<std::size_t>(e.src)].push_back(e);

    std::set<std::tuple<int, int, int>> seen;
    for (const auto& n : cfg.nodes) {
        if (!retained_cfg(n.kind))
            continue;
        for (const auto& e : succ[static_cast<std::size_t>(n.id)]) {
            // Follow the statement run to the next retained node.
            int cur = e.dst;
            std::set<int> visited;
            bool ok = true;
            while (!retained_cfg(cfg.nodes[static_cast<std::size_t>(cur)].kind)) {
                const auto& next = succ[static_cast<std::size_t>(cur)];
                if (next.empty() || !visited.insert(cur).second) {
                    ok = false;
                    break;
                }
                cur = next.front().dst;
            }
            if (!ok)
                continue;
            int s = remap[static_cast<std::size_t>(n.id)];
            int d = remap[static_cast<std::size_t>(cur)];
            if (seen.insert({s, d, static_cast<int>(e.label)}).second)
                out.edges.push_back({s, d, e.label});
        }
    }
    out.entry_id = remap[static_cast<std::size_t>(cfg.entry_id)];
    out.exit_id = remap[static_cast<std::size_t>(cfg.exit_id)];
    return out;
}

DfgGraph filter_dfg(const DfgGraph& dfg, Level /*level*/)
{
    std::vector<graphs::DfgEdge> cross;
    for (const auto& e : dfg.edges)
        if (dfg.node(e.src).stmt != dfg.node(e.dst).stmt)
            cross.push_back(e);

    std::vector<bool> reach(dfg.nodes.size(), false);
    std::vector<int> stack;
    for (const auto& n : dfg.nodes)
        if (n.kind == DfgKind::Param) {
            reach[static_cast<std::size_t>(n.id)] = true;
            stack.push_back(n.id);
        }
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& e : cross)
            if (e.src == v && !reach[static_cast<std::size_t>(e.dst)]) {
                reach[static_cast<std::size_t>(e.dst)] = true;
                stack.push_back(e.dst);
            }
    }

    std::vector<graphs::DfgEdge> kept;
    std::vector<bool> keep_node(dfg.nodes.size(), false);
    for (const auto& e : cross)
        if (reach[static_cast<std::size_t>(e.src)]) {
            kept.push_back(e);
            keep_node[static_cast<std::size_t>(e.src)] = true;
            keep_node[static_cast<std::size_t>(e.dst)] = true;
        }
    for (const auto& n : dfg.nodes)
        if (n.kind == DfgKind::Param)
            keep_node[static_cast<std::size_t>(n.id)] = true;

    DfgGraph out;
    std::vector<int> remap(dfg.nodes.size(), -1);
    for (const auto& n : dfg.nodes) {
        if (!keep_node[static_cast<std::size_t>(n.id)])
            continue;
        int id = static_cast<int>(out.nodes.size());
        remap[static_cast<std::size_t>(n.id)] = id;
        graphs::DfgNode copy = n;
        copy.id = id;
        out.nodes.push_back(std::move(copy));
    }
    for (const auto& e : kept)
        out.edges.push_back({remap[static_cast<std::size_t>(e.src)], remap[static_cast<std::size_t>(e.dst)]});
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

} // namespace vultriage::control
