#include "control/control_path.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <map>
#include <set>

namespace vultriage::control {

using graphs::AstKind;
using graphs::AstNode;
using graphs::CfgGraph;
using graphs::CfgKind;
using graphs::DfgGraph;
using graphs::DfgKind;
using graphs::EdgeLabel;

namespace {

int label_rank(EdgeLabel l)
{
    switch (l) {
    case EdgeLabel::True: return 0;
    case EdgeLabel::False: return 1;
    case EdgeLabel::Seq: return 2;
    }
    return 3;
}

std::string return_expression(const AstNode& ret)
{
    const std::string prefix = "return";
    std::string t = ret.text;
    if (t.rfind(prefix, 0) == 0)
        t = t.substr(prefix.size());
    while (!t.empty() && t.front() == ' ')
        t.erase(t.begin());
    return t;
}

using Step = std::pair<int, int>; // node id, outgoing label rank (-1 at the end)

std::vector<Step> steps(const CfgPath& p)
{
    std::vector<Step> out;
    for (std::size_t i = 0; i < p.nodes.size(); ++i)
        out.emplace_back(p.nodes[i], i < p.labels.size() ? label_rank(p.labels[i]) : -1);
    return out;
}

class PathEnumerator {
public:
    explicit PathEnumerator(const CfgGraph& g) : g_(g), succ_(g.nodes.size())
    {
        for (const auto& e : g.edges)
            succ_[static_cast<std::size_t>(e.src)].push_back(e);
        for (auto& s : succ_)
            std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) {
                return std::pair(label_rank(a.label), a.dst) < std::pair(label_rank(b.label), b.dst);
            });
        find_back_edges();
    }

    std::vector<CfgPath> all()
    {
        if (g_.nodes.empty() || g_.exit_id < 0)
            return {};
        CfgPath p;
        p.nodes.push_back(g_.entry_id);
        std::set<std::size_t> used;
        walk(p, used);
        return std::move(out_);
    }

private:
    void find_back_edges()
    {
        std::vector<int> state(g_.nodes.size(), 0); // 0 new, 1 on stack, 2 done
        std::function<void(int)> dfs = [&](int v) {
            state[static_cast<std::size_t>(v)] = 1;
            for (const auto& e : succ_[static_cast<std::size_t>(v)]) {
                int w = e.dst;
                if (state[static_cast<std::size_t>(w)] == 1)
                    back_.insert(key(e));
                else if (state[static_cast<std::size_t>(w)] == 0)
                    dfs(w);
            }
            state[static_cast<std::size_t>(v)] = 2;
        };
        if (!g_.nodes.empty())
            dfs(g_.entry_id);
    }

    std::size_t key(const graphs::CfgEdge& e) const
    {
        return (static_cast<std::size_t>(e.src) * g_.nodes.size() + static_cast<std::size_t>(e.dst)) * 3 +
               static_cast<std::size_t>(label_rank(e.label));
    }

    void walk(CfgPath& p, std::set<std::size_t>& used)
    {
        if (out_.size() >= kPathExplorationCap || ++expansions_ > kExpansionCap)
            return;
        int v = p.nodes.back();
        if (v == g_.exit_id) {
            out_.push_back(p);
            return;
        }
        for (const auto& e : succ_[static_cast<std::size_t>(v)]) {
            std::size_t k = key(e);
            bool is_back = back_.count(k) > 0;
            if (is_back && used.count(k))
                continue;
            if (is_back)
                used.insert(k);
            p.labels.push_back(e.label);
            p.nodes.push_back(e.dst);
            walk(p, used);
            p.nodes.pop_back();
            p.labels.pop_back();
            if (is_back)
                used.erase(k);
        }
    }

    const CfgGraph& g_;
    std::vector<std::vector<graphs::CfgEdge>> succ_;
    std::set<std::size_t> back_;
    std::vector<CfgPath> out_;
    std::size_t expansions_ = 0;
    static constexpr std::size_t kExpansionCap = 1'000'000;
};

} // namespace

int CfgPath::priority(const CfgGraph& g) const
{
    int p = 0;
    for (int id : nodes) {
        CfgKind k = g.node(id).kind;
        if (k == CfgKind::Branch || k == CfgKind::Loop || k == CfgKind::Call)
            ++p;
    }
    return p;
}

std::vector<AstView> aggregate_ast(const std::vector<AstNode>& filtered_roots)
{
    std::vector<AstView> views;
    std::map<std::string, std::size_t> by_shape;
    for (const auto& root : filtered_roots) {
        AstView v;
        v.name = root.name;
        v.line = root.line;
        v.counts = graphs::count_ast_categories(root);
        std::set<std::string> seen_calls;
        std::vector<std::string> shape;
        graphs::visit_preorder(root, [&](const AstNode& n) {
            shape.emplace_back(graphs::kind_name(n.kind));
            switch (n.kind) {
            case AstKind::Call:
                if (seen_calls.insert(n.name).second)
                    v.calls.push_back(n.name);
                break;
            case AstKind::Branch:
            case AstKind::Loop:
                v.conditions.push_back(n.text);
                break;
            case AstKind::Return: {
                std::string e = return_expression(n);
                if (!e.empty())
                    v.returns.push_back(e);
                break;
            }
            default:
                break;
            }
            return true;
        });
        for (const auto& s : shape) {
            v.shape += s;
            v.shape += ' ';
        }
        auto it = by_shape.find(v.shape);
        if (it != by_shape.end()) {
            ++views[it->second].represents;
            continue;
        }
        by_shape.emplace(v.shape, views.size());
        views.push_back(std::move(v));
    }
    return views;
}

std::vector<CfgPath> enumerate_paths(const CfgGraph& cfg, int b)
{
    if (b < 1)
        return {};
    std::vector<CfgPath> all = PathEnumerator(cfg).all();
    std::vector<std::pair<int, std::size_t>> ranked;
    for (std::size_t i = 0; i < all.size(); ++i)
        ranked.emplace_back(all[i].priority(cfg), i);
    std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& x, const auto& y) {
        if (x.first != y.first)
            return x.first > y.first;
        return all[x.second].nodes < all[y.second].nodes;
    });
    std::vector<CfgPath> chosen;
    for (std::size_t i = 0; i < ranked.size() && chosen.size() < static_cast<std::size_t>(b); ++i)
        chosen.push_back(all[ranked[i].second]);
    std::sort(chosen.begin(), chosen.end(),
              [](const CfgPath& x, const CfgPath& y) { return steps(x) < steps(y); });
    return chosen;
}

std::vector<Chain> trace_chains(const DfgGraph& dfg, int b)
{
    if (b < 1)
        return {};
    std::vector<std::vector<int>> succ(dfg.nodes.size());
    for (const auto& e : dfg.edges)
        succ[static_cast<std::size_t>(e.src)].push_back(e.dst);
    for (auto& s : succ)
        std::sort(s.begin(), s.end());

    // Nodes from which some sink is reachable; walks never leave this set.
    std::vector<bool> live(dfg.nodes.size(), false);
    std::vector<int> stack;
    for (const auto& n : dfg.nodes)
        if (n.kind == DfgKind::Sink) {
            live[static_cast<std::size_t>(n.id)] = true;
            stack.push_back(n.id);
        }
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& e : dfg.edges)
            if (e.dst == v && !live[static_cast<std::size_t>(e.src)]) {
                live[static_cast<std::size_t>(e.src)] = true;
                stack.push_back(e.src);
            }
    }
    auto open = [&](int w, const std::vector<bool>& on_path) {
        return live[static_cast<std::size_t>(w)] && !on_path[static_cast<std::size_t>(w)];
    };

    constexpr std::size_t kStepCap = 200000;
    std::vector<Chain> complete_all;
    std::vector<Chain> truncated_all;
    for (const auto& n : dfg.nodes) {
        if (n.kind != DfgKind::Param)
            continue;
        std::vector<Chain> complete;
        std::optional<Chain> truncated;
        std::vector<int> path = {n.id};
        std::vector<bool> on_path(dfg.nodes.size(), false);
        on_path[static_cast<std::size_t>(n.id)] = true;
        std::size_t steps_taken = 0;
        std::function<void()> dfs = [&]() {
            if (++steps_taken > kStepCap)
                return;
            int v = path.back();
            if (path.size() > 1 && dfg.node(v).kind == DfgKind::Sink) {
                complete.push_back({path, false});
                return;
            }
            const auto& next = succ[static_cast<std::size_t>(v)];
            bool can_extend = std::any_of(next.begin(), next.end(), [&](int w) { return open(w, on_path); });
            if (static_cast<int>(path.size()) - 1 >= b) {
                if (can_extend && !truncated)
                    truncated = Chain{path, true};
                return;
            }
            for (int w : next) {
                if (!open(w, on_path))
                    continue;
                on_path[static_cast<std::size_t>(w)] = true;
                path.push_back(w);
                dfs();
                path.pop_back();
                on_path[static_cast<std::size_t>(w)] = false;
            }
        };
        dfs();
        if (complete.empty() && truncated)
            truncated_all.push_back(*truncated);
        for (auto& c : complete)
            complete_all.push_back(std::move(c));
    }

    std::set<int> multi_hop_tails;
    for (const auto& c : complete_all)
        if (c.nodes.size() > 2)
            multi_hop_tails.insert(dfg.node(c.nodes.back()).stmt);

    // Preserve parameter order: merge complete and truncated chains by head.
    std::vector<Chain> merged;
    for (const auto& n : dfg.nodes) {
        if (n.kind != DfgKind::Param)
            continue;
        for (const auto& c : complete_all) {
            if (c.nodes.front() != n.id)
                continue;
            if (c.nodes.size() == 2 && multi_hop_tails.count(dfg.node(c.nodes.back()).stmt))
                continue;
            merged.push_back(c);
        }
        for (const auto& c : truncated_all)
            if (c.nodes.front() == n.id)
                merged.push_back(c);
    }
    if (merged.size() > static_cast<std::size_t>(b))
        merged.resize(static_cast<std::size_t>(b));
    return merged;
}

SalientViews extract_views(const graphs::GraphBundle& bundle, Granularity g)
{
    SalientViews views;
    std::vector<AstNode> roots;
    for (const auto& fg : bundle.functions) {
        roots.push_back(filter_ast(fg.ast, g.level));

        CfgView cv;
        cv.name = fg.ast.name;
        cv.total_nodes = static_cast<int>(fg.cfg.nodes.size());
        cv.graph = filter_cfg(fg.cfg, g.level);
        cv.paths = enumerate_paths(cv.graph, g.b);
        views.cfg_views.push_back(std::move(cv));

        DfgView dv;
        dv.name = fg.ast.name;
        dv.total_edges = static_cast<int>(fg.dfg.edges.size());
        dv.graph = filter_dfg(fg.dfg, g.level);
        for (const auto& n : dv.graph.nodes)
            if (n.kind == DfgKind::Param && !dv.graph.successors(n.id).empty())
                dv.sources.push_back(n.id);
        std::stable_sort(dv.sources.begin(), dv.sources.end(), [&](int x, int y) {
            return dv.graph.node(x).var < dv.graph.node(y).var;
        });
        dv.chains = trace_chains(dv.graph, g.b);
        views.dfg_views.push_back(std::move(dv));
    }
    views.ast_views = aggregate_ast(roots);
    return views;
}

} // namespace vultriage::control
