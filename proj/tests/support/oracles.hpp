#pragma once

// Slow reference implementations used only to cross-check the library.

#include <vector>

#include "causalfs/graph.hpp"

namespace testsupport {

// d-separation by enumerating every simple path between the source and sink
// sets and applying the blocking rules to each intermediate node: a path is
// blocked when some non-collider on it is conditioned on, or some collider is
// neither conditioned on nor an ancestor of a conditioned node.
inline bool d_separated_naive(const causalfs::CausalDag& dag, const causalfs::PathQuery& q) {
    using causalfs::NodeSet;
    const int n = dag.node_count();

    std::vector<std::vector<int>> undirected(n);
    for (const auto& [p, c] : dag.edges()) {
        undirected[p].push_back(c);
        undirected[c].push_back(p);
    }

    const NodeSet cond_anc =
        causalfs::set_union(q.conditioning, causalfs::ancestors(dag, q.conditioning));

    std::vector<int> path;
    std::vector<char> on_path(n, 0);
    bool found_active = false;

    auto path_active = [&]() {
        for (std::size_t i = 1; i + 1 < path.size(); ++i) {
            const int prev = path[i - 1], cur = path[i], next = path[i + 1];
            const bool collider = dag.has_edge(prev, cur) && dag.has_edge(next, cur);
            const bool conditioned = causalfs::set_contains(q.conditioning, cur);
            if (!collider && conditioned) return false;
            if (collider && !causalfs::set_contains(cond_anc, cur)) return false;
        }
        return true;
    };

    auto dfs = [&](auto&& self, int v) -> void {
        if (found_active) return;
        path.push_back(v);
        on_path[v] = 1;
        if (path.size() >= 2 && causalfs::set_contains(q.sinks, v)) {
            if (path_active()) found_active = true;
        } else {
            for (int w : undirected[v])
                if (!on_path[w]) self(self, w);
        }
        on_path[v] = 0;
        path.pop_back();
    };

    for (int s : q.sources) {
        if (found_active) break;
        dfs(dfs, s);
    }
    return !found_active;
}

}  // namespace testsupport
