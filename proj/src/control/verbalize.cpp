#include "control/control_path.hpp"
#include "control/templates.hpp"

#include "common/error.hpp"
#include "common/text.hpp"

#include <optional>
#include <set>

namespace vultriage::control {

using graphs::CfgKind;
using graphs::EdgeLabel;

std::string templates::render(std::string_view tmpl, const std::map<std::string, std::string>& values)
{
    std::string out;
    out.reserve(tmpl.size() + 64);
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '<') {
            std::size_t close = tmpl.find('>', i + 1);
            if (close != std::string_view::npos) {
                std::string key(tmpl.substr(i + 1, close - i - 1));
                auto it = values.find(key);
                if (it == values.end())
                    throw MissingPlaceholder(key);
                out += it->second;
                i = close + 1;
                continue;
            }
        }
        out += tmpl[i++];
    }
    return out;
}

namespace {

std::string sentences(const std::vector<std::string>& parts)
{
    return text::join(parts, " ");
}

std::string ast_line(const AstView& v)
{
    using namespace templates;
    std::vector<std::string> parts;
    parts.push_back(render(kAstSummary, {{"name", v.name},
                                         {"line", std::to_string(v.line)},
                                         {"nd", std::to_string(v.counts.declarations)},
                                         {"na", std::to_string(v.counts.assignments)},
                                         {"nb", std::to_string(v.counts.branches)},
                                         {"nc", std::to_string(v.counts.calls)}}));
    if (!v.calls.empty())
        parts.push_back(render(kKeyCalls, {{"calls", text::join(v.calls, ", ")}}));
    if (!v.conditions.empty())
        parts.push_back(render(kConditions, {{"stmts", text::join(v.conditions, "; ")}}));
    if (!v.returns.empty())
        parts.push_back(render(kReturns, {{"exprs", text::join(v.returns, "; ")}}));
    if (v.represents > 1)
        parts.push_back(render(kIsomorphic, {{"rep", v.name}, {"n", std::to_string(v.represents)}}));
    return sentences(parts);
}

std::string node_step(const graphs::CfgGraph& g, int id, std::optional<EdgeLabel> out_label)
{
    const auto& n = g.node(id);
    if (n.kind == CfgKind::Entry)
        return "Entry";
    if (n.kind == CfgKind::Exit)
        return "Exit";
    if ((n.kind == CfgKind::Branch || n.kind == CfgKind::Loop) && out_label &&
        *out_label != EdgeLabel::Seq)
        return "[" + std::string(graphs::edge_label_name(*out_label)) + "] " + n.label;
    return n.label;
}

std::string cfg_line(const CfgView& v)
{
    using namespace templates;
    const auto& g = v.graph;
    int branches = 0, calls = 0;
    for (const auto& n : g.nodes) {
        if (n.kind == CfgKind::Branch || n.kind == CfgKind::Loop)
            ++branches;
        else if (n.kind == CfgKind::Call)
            ++calls;
    }
    std::vector<std::string> parts;
    parts.push_back(render(kCfgSummary, {{"name", v.name},
                                         {"k", std::to_string(g.nodes.size())},
                                         {"n", std::to_string(v.total_nodes)},
                                         {"nb", std::to_string(branches)},
                                         {"nc", std::to_string(calls)}}));

    std::vector<const CfgPath*> shown;
    for (const auto& p : v.paths)
        if (p.nodes.size() > 2)
            shown.push_back(&p);

    std::set<int> covered;
    for (const auto* p : shown)
        covered.insert(p->nodes.begin(), p->nodes.end());
    std::vector<std::string> missing;
    for (const auto& n : g.nodes)
        if ((n.kind == CfgKind::Branch || n.kind == CfgKind::Loop) && !covered.count(n.id))
            missing.push_back(n.label + "@L" + std::to_string(n.line));
    if (!missing.empty())
        parts.push_back(render(kBranchListing, {{"items", text::join(missing, "; ")}}));

    int index = 0;
    for (const auto* p : shown) {
        std::vector<std::string> steps;
        for (std::size_t i = 0; i < p->nodes.size(); ++i) {
            std::optional<EdgeLabel> out;
            if (i < p->labels.size())
                out = p->labels[i];
            steps.push_back(node_step(g, p->nodes[i], out));
        }
        parts.push_back(render(kPath, {{"i", std::to_string(++index)},
                                       {"steps", text::join(steps, kArrow)}}));
    }
    return sentences(parts);
}

std::string dfg_line(const DfgView& v)
{
    using namespace templates;
    const auto& g = v.graph;
    std::vector<std::string> parts;
    parts.push_back(render(kDfgSummary, {{"name", v.name},
                                         {"k", std::to_string(g.edges.size())},
                                         {"n", std::to_string(v.total_edges)},
                                         {"np", std::to_string(v.sources.size())},
                                         {"nc", std::to_string(v.chains.size())}}));
    if (!v.sources.empty()) {
        std::vector<std::string> items;
        for (int id : v.sources) {
            const auto& n = g.node(id);
            items.push_back(n.label + "@L" + std::to_string(n.line));
        }
        parts.push_back(render(kParamListing, {{"items", text::join(items, "; ")}}));
    }
    for (const auto& c : v.chains) {
        std::vector<std::string> steps;
        for (int id : c.nodes)
            steps.push_back(g.node(id).label);
        if (c.truncated)
            steps.emplace_back(kEllipsis);
        parts.push_back(render(kDataChain, {{"steps", text::join(steps, kArrow)}}));
    }
    return sentences(parts);
}

} // namespace

StructuralContext verbalize(const SalientViews& views)
{
    std::vector<std::string> a, c, d;
    for (const auto& v : views.ast_views)
        a.push_back(ast_line(v));
    for (const auto& v : views.cfg_views)
        c.push_back(cfg_line(v));
    for (const auto& v : views.dfg_views)
        d.push_back(dfg_line(v));
    StructuralContext sc;
    sc.t_ast = text::join(a, "\n");
    sc.t_cfg = text::join(c, "\n");
    sc.t_dfg = text::join(d, "\n");
    sc.s = sc.t_ast + "\n" + sc.t_cfg + "\n" + sc.t_dfg;
    return sc;
}

StructuralContext generate_structural_context(const graphs::SourceFunction& fn, Level level)
{
    auto bundle = graphs::parse(fn);
    return verbalize(extract_views(bundle, Granularity::of(level)));
}

} // namespace vultriage::control
