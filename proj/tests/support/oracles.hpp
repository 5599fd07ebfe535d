#pragma once

// Reference implementations used as test oracles. They deliberately use
// different algorithms from the production code.

#include "graphs/graphs.hpp"

#include <cmath>
#include <cstdint>
#include <deque>
#include <set>
#include <utility>
#include <vector>

namespace vt_test {

using PathKey = std::vector<std::pair<int, int>>; // (node, label of outgoing edge or -1)

// Iterative dominator sets over the nodes reachable from entry.
inline std::vector<std::set<int>> dominators(const vultriage::graphs::CfgGraph& g)
{
    const int n = static_cast<int>(g.nodes.size());
    std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
    for (const auto& e : g.edges)
        preds[static_cast<std::size_t>(e.dst)].push_back(e.src);
    std::set<int> all;
    for (int i = 0; i < n; ++i)
        all.insert(i);
    std::vector<std::set<int>> dom(static_cast<std::size_t>(n), all);
    dom[static_cast<std::size_t>(g.entry_id)] = {g.entry_id};
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v = 0; v < n; ++v) {
            if (v == g.entry_id)
                continue;
            std::set<int> d = all;
            bool any = false;
            for (int p : preds[static_cast<std::size_t>(v)]) {
                any = true;
                std::set<int> keep;
                for (int x : d)
                    if (dom[static_cast<std::size_t>(p)].count(x))
                        keep.insert(x);
                d = std::move(keep);
            }
            if (!any)
                d.clear();
            d.insert(v);
            if (d != dom[static_cast<std::size_t>(v)]) {
                dom[static_cast<std::size_t>(v)] = std::move(d);
                changed = true;
            }
        }
    }
    return dom;
}

// Every entry-to-exit walk that uses each loop back edge (target dominates
// source) at most once, found breadth-first with an explicit queue.
// Returns false if more than `cap` walks exist.
inline bool all_paths_oracle(const vultriage::graphs::CfgGraph& g, std::set<PathKey>& out, std::size_t cap = 100000)
{
    auto dom = dominators(g);
    auto is_back = [&](const vultriage::graphs::CfgEdge& e) {
        return dom[static_cast<std::size_t>(e.src)].count(e.dst) > 0;
    };
    struct State {
        PathKey steps; // last step has label -1
        std::set<std::size_t> used;
    };
    std::deque<State> queue;
    queue.push_back({{{g.entry_id, -1}}, {}});
    std::size_t expanded = 0;
    while (!queue.empty()) {
        State s = std::move(queue.front());
        queue.pop_front();
        if (++expanded > cap * 50)
            return false;
        int v = s.steps.back().first;
        if (v == g.exit_id) {
            out.insert(s.steps);
            if (out.size() > cap)
                return false;
            continue;
        }
        for (std::size_t i = 0; i < g.edges.size(); ++i) {
            const auto& e = g.edges[i];
            if (e.src != v)
                continue;
            bool back = is_back(e);
            if (back && s.used.count(i))
                continue;
            State t = s;
            t.steps.back().second = static_cast<int>(e.label);
            t.steps.emplace_back(e.dst, -1);
            if (back)
                t.used.insert(i);
            queue.push_back(std::move(t));
        }
    }
    return true;
}

// Exact binomial(n, 1/2) probability mass, computed with integer binomials.
inline double binom_half_pmf(unsigned n, unsigned k)
{
    long double c = 1;
    for (unsigned i = 1; i <= k; ++i)
        c = c * (n - k + i) / i;
    return static_cast<double>(c / std::pow(2.0L, static_cast<long double>(n)));
}

// Two-sided exact McNemar p-value by summing the pmf over every outcome at
// least as extreme as the observed one.
inline double mcnemar_bruteforce(unsigned b, unsigned c)
{
    unsigned n = b + c;
    if (n == 0)
        return 1.0;
    double observed = binom_half_pmf(n, b);
    double p = 0;
    for (unsigned k = 0; k <= n; ++k) {
        double pk = binom_half_pmf(n, k);
        if (pk <= observed * (1 + 1e-12))
            p += pk;
    }
    return p > 1.0 ? 1.0 : p;
}

} // namespace vt_test
