#include "graphs/builders.hpp"

#include "common/text.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace vultriage::graphs {

namespace {

std::vector<std::string> call_names(const AstNode& stmt)
{
    std::vector<std::string> names;
    visit_preorder(stmt, [&](const AstNode& n) {
        if (is_type_expansion(n.kind))
            return false;
        if (n.kind == AstKind::Call)
            names.push_back(n.name);
        return true;
    });
    return names;
}

struct Dangling {
    int node;
    EdgeLabel label;
};

class CfgBuilder {
public:
    CfgBuild run(const AstNode& fn)
    {
        add(CfgKind::Entry, "Entry", fn.line, {});
        dangling_ = {{0, EdgeLabel::Seq}};
        for (const auto& c : fn.children) {
            if (c.kind != AstKind::ParamList)
                continue;
            for (const auto& p : c.children) {
                if (p.kind != AstKind::Declaration || p.name.empty())
                    continue;
                NodeOrigin o{NodeOrigin::Mode::Param, {&p}};
                add(CfgKind::Statement, "param " + p.name, p.line, o);
                dangling_ = {{last_id(), EdgeLabel::Seq}};
            }
        }
        if (const AstNode* body = fn.child(Role::Body))
            stmt(*body);
        int exit = add(CfgKind::Exit, "Exit", last_line(fn), {});
        for (int r : returns_)
            edge(r, exit, EdgeLabel::Seq);
        for (const auto& [from, target] : gotos_) {
            auto it = labels_.find(target);
            edge(from, it == labels_.end() ? exit : it->second, EdgeLabel::Seq);
        }
        return prune(exit);
    }

private:
    struct Context {
        bool is_loop = false;
        int continue_target = -1;          // -1 until known (do-while)
        std::vector<Dangling> breaks;
        std::vector<Dangling> continues;   // only used while continue_target is unknown
        bool has_default = false;
        int switch_node = -1;
    };

    int last_id() const { return static_cast<int>(b_.graph.nodes.size()) - 1; }

    static int last_line(const AstNode& fn)
    {
        int line = fn.line;
        visit_preorder(fn, [&](const AstNode& n) {
            line = std::max(line, n.line);
            return true;
        });
        return line;
    }

    int add(CfgKind kind, std::string label, int line, NodeOrigin origin)
    {
        int id = static_cast<int>(b_.graph.nodes.size());
        b_.graph.nodes.push_back({id, kind, std::move(label), line});
        b_.origins.push_back(std::move(origin));
        for (const auto& d : dangling_)
            edge(d.node, id, d.label);
        dangling_.clear();
        for (const auto& l : pending_labels_)
            labels_.emplace(l, id);
        pending_labels_.clear();
        return id;
    }

    void edge(int src, int dst, EdgeLabel label) { b_.graph.edges.push_back({src, dst, label}); }

    void connect_dangling_to(int id)
    {
        for (const auto& d : dangling_)
            edge(d.node, id, d.label);
        dangling_.clear();
    }

    Context* nearest_loop()
    {
        for (auto it = ctx_.rbegin(); it != ctx_.rend(); ++it)
            if (it->is_loop)
                return &*it;
        return nullptr;
    }

    void body(const AstNode& n, Role role)
    {
        if (const AstNode* b = n.child(role))
            stmt(*b);
    }

    static NodeOrigin header_origin(const AstNode& n, std::initializer_list<Role> roles)
    {
        NodeOrigin o{NodeOrigin::Mode::Header, {}};
        for (Role r : roles)
            for (const auto& c : n.children)
                if (c.role == r)
                    o.parts.push_back(&c);
        return o;
    }

    void stmt(const AstNode& n)
    {
        switch (n.kind) {
        case AstKind::Compound:
            for (const auto& c : n.children)
                stmt(c);
            return;
        case AstKind::Branch:
            if (n.name == "switch")
                switch_stmt(n);
            else
                if_stmt(n);
            return;
        case AstKind::Loop:
            if (n.name == "do")
                do_stmt(n);
            else
                loop_stmt(n);
            return;
        case AstKind::Return: {
            int id = add(CfgKind::Return, n.text, n.line, {NodeOrigin::Mode::Statement, {&n}});
            returns_.push_back(id);
            return;
        }
        case AstKind::Jump:
            jump(n);
            return;
        case AstKind::Label:
            pending_labels_.push_back(n.name);
            body(n, Role::Body);
            return;
        case AstKind::Case: {
            Context* sw = nullptr;
            for (auto it = ctx_.rbegin(); it != ctx_.rend(); ++it)
                if (!it->is_loop) {
                    sw = &*it;
                    break;
                }
            if (sw) {
                bool is_default = n.name == "default";
                if (is_default)
                    sw->has_default = true;
                dangling_.push_back({sw->switch_node, is_default ? EdgeLabel::False : EdgeLabel::True});
            }
            body(n, Role::Body);
            return;
        }
        case AstKind::DeclGroup:
            if (n.name == "typedef")
                return;
            break;
        default:
            break;
        }
        auto calls = call_names(n);
        CfgKind kind = calls.empty() ? CfgKind::Statement : CfgKind::Call;
        add(kind, statement_label(n), n.line, {NodeOrigin::Mode::Statement, {&n}});
        dangling_ = {{last_id(), EdgeLabel::Seq}};
    }

    void if_stmt(const AstNode& n)
    {
        int c = add(CfgKind::Branch, n.text, n.line, header_origin(n, {Role::Cond}));
        dangling_ = {{c, EdgeLabel::True}};
        body(n, Role::Then);
        auto then_out = std::move(dangling_);
        dangling_ = {{c, EdgeLabel::False}};
        body(n, Role::Else);
        dangling_.insert(dangling_.begin(), then_out.begin(), then_out.end());
    }

    void loop_stmt(const AstNode& n)
    {
        int l = add(CfgKind::Loop, n.text, n.line,
                    header_origin(n, {Role::Init, Role::Cond, Role::Step}));
        bool infinite = n.name == "for" && n.child(Role::Cond) == nullptr;
        dangling_ = {{l, EdgeLabel::True}};
        ctx_.push_back({true, l, {}, {}, false, -1});
        body(n, Role::Body);
        connect_dangling_to(l);
        Context done = std::move(ctx_.back());
        ctx_.pop_back();
        if (!infinite)
            dangling_.push_back({l, EdgeLabel::False});
        dangling_.insert(dangling_.end(), done.breaks.begin(), done.breaks.end());
    }

    void do_stmt(const AstNode& n)
    {
        int first = static_cast<int>(b_.graph.nodes.size());
        ctx_.push_back({true, -1, {}, {}, false, -1});
        body(n, Role::Body);
        Context done = std::move(ctx_.back());
        ctx_.pop_back();
        dangling_.insert(dangling_.end(), done.continues.begin(), done.continues.end());
        int d = add(CfgKind::Loop, n.text, n.line, header_origin(n, {Role::Cond}));
        int body_first = first < d ? first : d;
        edge(d, body_first, EdgeLabel::True);
        dangling_ = {{d, EdgeLabel::False}};
        dangling_.insert(dangling_.end(), done.breaks.begin(), done.breaks.end());
    }

    void switch_stmt(const AstNode& n)
    {
        int s = add(CfgKind::Branch, n.text, n.line, header_origin(n, {Role::Cond}));
        dangling_.clear();
        ctx_.push_back({false, -1, {}, {}, false, s});
        body(n, Role::Body);
        Context done = std::move(ctx_.back());
        ctx_.pop_back();
        dangling_.insert(dangling_.end(), done.breaks.begin(), done.breaks.end());
        if (!done.has_default)
            dangling_.push_back({s, EdgeLabel::False});
    }

    void jump(const AstNode& n)
    {
        int id = add(CfgKind::Statement, n.text, n.line, {NodeOrigin::Mode::None, {&n}});
        if (n.name == "break") {
            if (!ctx_.empty())
                ctx_.back().breaks.push_back({id, EdgeLabel::Seq});
            else
                returns_.push_back(id);
        } else if (n.name == "continue") {
            Context* loop = nearest_loop();
            if (!loop)
                returns_.push_back(id);
            else if (loop->continue_target >= 0)
                edge(id, loop->continue_target, EdgeLabel::Seq);
            else
                loop->continues.push_back({id, EdgeLabel::Seq});
        } else { // goto
            std::string target = n.children.empty() ? std::string() : n.children.front().name;
            gotos_.emplace_back(id, target);
        }
    }

    CfgBuild prune(int exit)
    {
        const auto& g = b_.graph;
        std::vector<std::vector<int>> succ(g.nodes.size());
        for (const auto& e : g.edges)
            succ[static_cast<std::size_t>(e.src)].push_back(e.dst);
        std::vector<bool> seen(g.nodes.size(), false);
        std::vector<int> stack = {0};
        seen[0] = true;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : succ[static_cast<std::size_t>(v)])
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = true;
                    stack.push_back(w);
                }
        }
        seen[static_cast<std::size_t>(exit)] = true;

        CfgBuild out;
        std::vector<int> remap(g.nodes.size(), -1);
        for (const auto& node : g.nodes) {
            if (!seen[static_cast<std::size_t>(node.id)])
                continue;
            int id = static_cast<int>(out.graph.nodes.size());
            remap[static_cast<std::size_t>(node.id)] = id;
            CfgNode copy = node;
            copy.id = id;
            out.graph.nodes.push_back(std::move(copy));
            out.origins.push_back(b_.origins[static_cast<std::size_t>(node.id)]);
        }
        std::set<std::tuple<int, int, int>> seen_edges;
        for (const auto& e : g.edges) {
            int s = remap[static_cast<std::size_t>(e.src)];
            int d = remap[static_cast<std::size_t>(e.dst)];
            if (s < 0 || d < 0)
                continue;
            if (!seen_edges.insert({s, d, static_cast<int>(e.label)}).second)
                continue;
            out.graph.edges.push_back({s, d, e.label});
        }
        out.graph.entry_id = 0;
        out.graph.exit_id = remap[static_cast<std::size_t>(exit)];
        return out;
    }

    CfgBuild b_;
    std::vector<Dangling> dangling_;
    std::vector<Context> ctx_;
    std::vector<int> returns_;
    std::vector<std::pair<int, std::string>> gotos_;
    std::map<std::string, int> labels_;
    std::vector<std::string> pending_labels_;
};

} // namespace

std::string statement_label(const AstNode& stmt)
{
    if (stmt.kind == AstKind::Return || stmt.kind == AstKind::Jump)
        return stmt.text;
    auto calls = call_names(stmt);
    if (!calls.empty())
        return "call " + text::join(calls, ", ");
    std::string t = text::trim(stmt.text);
    while (!t.empty() && t.back() == ';')
        t.pop_back();
    return t;
}

CfgBuild build_cfg(const AstNode& fn)
{
    return CfgBuilder().run(fn);
}

} // namespace vultriage::graphs
