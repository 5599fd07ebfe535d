// Statement-level reaching-definitions over named scalars and pointers.
//
// Each CFG node contributes at most one occurrence node per (variable, role):
// a use or sink node for reads, a def node for writes. Right-hand-side reads
// of an assignment do not get nodes of their own; the def node is linked
// directly from the occurrences that reach the statement ("relabeling").

#include "graphs/builders.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace vultriage::graphs {

namespace {

// Argument index that a library call writes through without reading it.
const std::unordered_map<std::string, std::size_t> kBufferWriters = {
    {"memcpy", 0},   {"memmove", 0},  {"memset", 0},   {"strcpy", 0},    {"strncpy", 0},
    {"strcat", 0},   {"strncat", 0},  {"sprintf", 0},  {"snprintf", 0},  {"vsprintf", 0},
    {"vsnprintf", 0}, {"fgets", 0},   {"gets", 0},     {"wcscpy", 0},    {"wcsncpy", 0},
    {"fread", 0},    {"read", 1},     {"recv", 1},     {"bcopy", 1},
};

struct ReadEvent {
    std::string var;
    bool sink = false;
};

struct DefEvent {
    std::string var;
    std::set<std::string> sources;
    bool strong = true;
};

struct Events {
    std::vector<ReadEvent> reads;
    std::vector<DefEvent> defs;
};

const AstNode* strip_casts(const AstNode* n)
{
    while (n && n->kind == AstKind::Operator && n->name == "cast" && n->children.size() == 2)
        n = &n->children[1];
    return n;
}

const AstNode* base_variable(const AstNode* n)
{
    while (n) {
        n = strip_casts(n);
        if (n->kind == AstKind::Identifier)
            return n;
        if (n->kind != AstKind::Operator || n->children.empty())
            return nullptr;
        if (n->name == "[]" || n->name == "->" || n->name == "." || n->name == "*")
            n = &n->children.front();
        else
            return nullptr;
    }
    return nullptr;
}

class Extractor {
public:
    explicit Extractor(const std::set<std::string>& tracked) : tracked_(tracked) {}

    Events run(const NodeOrigin& origin)
    {
        ev_ = {};
        for (const AstNode* part : origin.parts) {
            if (part->kind == AstKind::Return) {
                if (const AstNode* v = part->child(Role::Value))
                    walk(*v, {true, nullptr});
            } else {
                walk(*part, {false, nullptr});
            }
        }
        return std::move(ev_);
    }

private:
    struct Ctx {
        bool sink = false;
        std::set<std::string>* collector = nullptr;
    };

    bool tracked(const std::string& v) const { return tracked_.count(v) > 0; }

    void read(const std::string& v, Ctx ctx)
    {
        if (ctx.collector)
            ctx.collector->insert(v);
        if (ctx.sink || !ctx.collector)
            ev_.reads.push_back({v, ctx.sink});
    }

    void def(const std::string& v, std::set<std::string> sources, bool strong)
    {
        ev_.defs.push_back({v, std::move(sources), strong});
    }

    void walk_children(const AstNode& n, Ctx ctx)
    {
        for (const auto& c : n.children)
            walk(c, ctx);
    }

    void walk(const AstNode& n, Ctx ctx)
    {
        if (is_type_expansion(n.kind))
            return;
        switch (n.kind) {
        case AstKind::Identifier:
            if (tracked(n.name))
                read(n.name, ctx);
            return;
        case AstKind::Declaration: {
            if (!n.has_initializer || !tracked(n.name))
                return;
            std::set<std::string> src;
            if (const AstNode* init = n.child(Role::Value))
                walk(*init, {false, &src});
            def(n.name, std::move(src), true);
            return;
        }
        case AstKind::Assignment:
            assignment(n, ctx);
            return;
        case AstKind::Call:
            call(n, ctx);
            return;
        case AstKind::Operator:
            if ((n.name == "++" || n.name == "--" || n.name == "p++" || n.name == "p--") &&
                n.children.size() == 1) {
                const AstNode* target = strip_casts(&n.children.front());
                if (target->kind == AstKind::Identifier && tracked(target->name)) {
                    def(target->name, {target->name}, true);
                    if (ctx.collector)
                        ctx.collector->insert(target->name);
                    return;
                }
            }
            walk_children(n, ctx);
            return;
        default:
            walk_children(n, ctx);
            return;
        }
    }

    void assignment(const AstNode& n, Ctx ctx)
    {
        const AstNode* lhs = n.child(Role::Lhs);
        const AstNode* rhs = n.child(Role::Rhs);
        std::set<std::string> src;
        if (rhs)
            walk(*rhs, {ctx.sink, &src});
        const AstNode* target = lhs ? strip_casts(lhs) : nullptr;
        if (target && target->kind == AstKind::Identifier) {
            if (tracked(target->name)) {
                if (n.name != "=")
                    src.insert(target->name);
                if (ctx.collector) {
                    ctx.collector->insert(src.begin(), src.end());
                    ctx.collector->insert(target->name);
                }
                def(target->name, std::move(src), true);
            }
            return;
        }
        if (lhs) {
            walk(*lhs, {ctx.sink, nullptr});
            const AstNode* base = base_variable(lhs);
            if (base && tracked(base->name)) {
                if (ctx.collector) {
                    ctx.collector->insert(src.begin(), src.end());
                    ctx.collector->insert(base->name);
                }
                def(base->name, std::move(src), false);
            }
        }
    }

    void call(const AstNode& n, Ctx ctx)
    {
        std::size_t dest = static_cast<std::size_t>(-1);
        if (auto it = kBufferWriters.find(n.name); it != kBufferWriters.end())
            dest = it->second;
        std::size_t arg_index = 0;
        for (const auto& c : n.children) {
            if (c.role == Role::Callee) {
                walk(c, {true, ctx.collector});
                continue;
            }
            if (c.role != Role::Arg)
                continue;
            std::size_t i = arg_index++;
            const AstNode* a = strip_casts(&c);
            if (i == dest && a->kind == AstKind::Identifier && tracked(a->name)) {
                def(a->name, {}, true);
                continue;
            }
            if (a->kind == AstKind::Operator && a->name == "&" && a->children.size() == 1 &&
                a->children.front().kind == AstKind::Identifier &&
                tracked(a->children.front().name)) {
                def(a->children.front().name, {}, true);
                continue;
            }
            walk(c, {true, ctx.collector});
        }
    }

    const std::set<std::string>& tracked_;
    Events ev_;
};

using State = std::map<std::string, std::set<int>>;

struct Occurrences {
    std::vector<std::pair<std::string, int>> reads; // var, DFG node id
    std::vector<std::pair<int, std::set<std::string>>> defs; // DFG node id, sources
    std::vector<std::pair<std::string, bool>> def_vars; // var, strong
    int param = -1;
    std::string param_var;
};

bool merge_into(State& dst, const State& src)
{
    bool changed = false;
    for (const auto& [v, ids] : src) {
        auto& d = dst[v];
        for (int id : ids)
            changed = d.insert(id).second || changed;
    }
    return changed;
}

} // namespace

DfgGraph build_dfg(const AstNode& fn, const CfgBuild& cfg)
{
    std::set<std::string> tracked;
    visit_preorder(fn, [&](const AstNode& n) {
        if (n.kind == AstKind::Typename)
            return false;
        if (n.kind == AstKind::Declaration && !n.name.empty())
            tracked.insert(n.name);
        return true;
    });

    const auto& g = cfg.graph;
    const std::size_t n_nodes = g.nodes.size();
    DfgGraph out;
    std::vector<Occurrences> occ(n_nodes);
    Extractor extractor(tracked);

    auto add_node = [&](const std::string& var, DfgKind kind, int line, std::string label, int stmt) {
        int id = static_cast<int>(out.nodes.size());
        out.nodes.push_back({id, var, kind, line, std::move(label), stmt});
        return id;
    };

    for (std::size_t i = 0; i < n_nodes; ++i) {
        const NodeOrigin& origin = cfg.origins[i];
        const CfgNode& cn = g.nodes[i];
        Occurrences& o = occ[i];
        if (origin.mode == NodeOrigin::Mode::Param) {
            const std::string& name = origin.parts.front()->name;
            o.param = add_node(name, DfgKind::Param, cn.line, "param:" + name, cn.id);
            o.param_var = name;
            continue;
        }
        if (origin.mode == NodeOrigin::Mode::None || origin.parts.empty())
            continue;
        Events ev = extractor.run(origin);

        std::vector<std::string> read_order;
        std::map<std::string, bool> read_sink;
        for (const auto& r : ev.reads) {
            auto [it, inserted] = read_sink.emplace(r.var, r.sink);
            if (inserted)
                read_order.push_back(r.var);
            else
                it->second = it->second || r.sink;
        }
        for (const auto& v : read_order) {
            DfgKind kind = read_sink[v] ? DfgKind::Sink : DfgKind::Use;
            o.reads.emplace_back(v, add_node(v, kind, cn.line, cn.label, cn.id));
        }

        std::vector<std::string> def_order;
        std::map<std::string, DefEvent> merged;
        for (auto& d : ev.defs) {
            auto it = merged.find(d.var);
            if (it == merged.end()) {
                def_order.push_back(d.var);
                merged.emplace(d.var, d);
            } else {
                it->second.sources.insert(d.sources.begin(), d.sources.end());
                it->second.strong = it->second.strong || d.strong;
            }
        }
        for (const auto& v : def_order) {
            const DefEvent& d = merged.at(v);
            int id = add_node(v, DfgKind::Def, cn.line, "def:" + v, cn.id);
            o.defs.emplace_back(id, d.sources);
            o.def_vars.emplace_back(v, d.strong);
        }
    }

    auto transfer = [&](std::size_t i, const State& in) {
        State s = in;
        const Occurrences& o = occ[i];
        if (o.param >= 0)
            s[o.param_var] = {o.param};
        for (const auto& [v, id] : o.reads)
            s[v] = {id};
        for (std::size_t k = 0; k < o.defs.size(); ++k) {
            const auto& [v, strong] = o.def_vars[k];
            if (strong)
                s[v] = {o.defs[k].first};
            else
                s[v].insert(o.defs[k].first);
        }
        return s;
    };

    std::vector<std::vector<int>> preds(n_nodes);
    std::vector<std::vector<int>> succs(n_nodes);
    for (const auto& e : g.edges) {
        preds[static_cast<std::size_t>(e.dst)].push_back(e.src);
        succs[static_cast<std::size_t>(e.src)].push_back(e.dst);
    }

    std::vector<State> in(n_nodes), outs(n_nodes);
    std::set<int> work;
    for (std::size_t i = 0; i < n_nodes; ++i)
        work.insert(static_cast<int>(i));
    while (!work.empty()) {
        int v = *work.begin();
        work.erase(work.begin());
        auto vi = static_cast<std::size_t>(v);
        State merged;
        for (int p : preds[vi])
            merge_into(merged, outs[static_cast<std::size_t>(p)]);
        in[vi] = std::move(merged);
        State next = transfer(vi, in[vi]);
        if (next != outs[vi]) {
            outs[vi] = std::move(next);
            for (int s : succs[vi])
                work.insert(s);
        }
    }

    std::set<DfgEdge> edges;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const Occurrences& o = occ[i];
        const State& st = in[i];
        auto reaching = [&](const std::string& v) -> const std::set<int>* {
            auto it = st.find(v);
            return it == st.end() ? nullptr : &it->second;
        };
        for (const auto& [v, id] : o.reads)
            if (const auto* r = reaching(v))
                for (int s : *r)
                    if (s != id)
                        edges.insert({s, id});
        for (const auto& [id, sources] : o.defs)
            for (const auto& v : sources)
                if (const auto* r = reaching(v))
                    for (int s : *r)
                        if (s != id)
                            edges.insert({s, id});
    }
    out.edges.assign(edges.begin(), edges.end());
    return out;
}

} // namespace vultriage::graphs
