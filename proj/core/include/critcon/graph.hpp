#pragma once

#include <cstddef>
#include <map>
#include <vector>

namespace critcon {

/// Undirected multigraph with integer node labels. Self-loops allowed.
struct LabelledGraph {
    std::vector<int> label;
    std::vector<std::map<int, int>> adj;  ///< neighbour -> multiplicity; a self-loop adds 1 to adj[u][u]
    std::size_t edges = 0;

    int add_node(int lab);
    void add_edge(int u, int v);
    /// Copy without the nodes whose label is `lab` (and their edges).
    [[nodiscard]] LabelledGraph without_label(int lab) const;
};

/// Exact label-preserving isomorphism: colour refinement, then backtracking
/// in BFS order. Meant for graphs of a few hundred nodes at most.
[[nodiscard]] bool isomorphic(const LabelledGraph& a, const LabelledGraph& b);

}  // namespace critcon
