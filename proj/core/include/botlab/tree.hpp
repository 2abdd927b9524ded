#pragma once

#include <utility>
#include <vector>

namespace botlab {

using VertexSet = std::vector<int>;

// Rooted tree with breadth-first vertex ids (root = 0) and all leaves on the
// bottom layer.  Subtree leaf sets are contiguous id ranges under this numbering.
class RootedTree {
public:
    int n() const { return static_cast<int>(parent_.size()); }
    int root() const { return 0; }
    int depth() const { return depth_; }
    int parent(int u) const { return parent_[u]; }
    const std::vector<int>& children(int u) const { return children_[u]; }
    int layer(int u) const { return layer_[u]; }
    int height(int u) const { return depth_ - layer_[u]; }
    bool is_leaf(int u) const { return layer_[u] == depth_; }
    VertexSet leaves() const { return leaves_below(0); }

    // anc(u,k); -1 when the ancestor does not exist.
    int ancestor(int u, int k) const;
    // a is an ancestor of u or equal to it (u "below or equal" a).
    bool is_below(int u, int a) const;
    VertexSet leaves_below(int u) const;
    int leaf_count(int u) const { return leaf_hi_[u] - leaf_lo_[u] + 1; }
    std::pair<int, int> leaf_range(int u) const { return {leaf_lo_[u], leaf_hi_[u]}; }
    // Descendants of u exactly k layers down.
    VertexSet descendants_at(int u, int k) const;
    // First vertex id at the given height.
    int first_at_height(int h) const;

private:
    friend RootedTree build_dary(int d, int depth);
    friend RootedTree tree_from_edges(int n, const std::vector<std::pair<int, int>>& edges, int root);
    friend RootedTree tree_from_parents(const std::vector<int>& parent);
    void finalize();

    std::vector<int> parent_;
    std::vector<std::vector<int>> children_;
    std::vector<int> layer_;
    std::vector<int> leaf_lo_, leaf_hi_;
    int depth_ = 0;
};

RootedTree build_dary(int d, int depth);
// Edge list (parent, child) with arbitrary ids; re-indexed breadth-first with
// children kept in edge-list order.
RootedTree tree_from_edges(int n, const std::vector<std::pair<int, int>>& edges, int root);
// Parent array already in breadth-first order (parent[0] = -1, parent[i] < i).
RootedTree tree_from_parents(const std::vector<int>& parent);
RootedTree build_path(int length);

bool check_degree_dominated(const RootedTree& t, int d, double R);
VertexSet o_set(const RootedTree& t, int u, int k);
VertexSet dm_set(const RootedTree& t, int u, int m);
int nearest_common_ancestor(const RootedTree& t, int u, int v);
int nearest_common_ancestor(const RootedTree& t, const VertexSet& s);
int pivot_vertex(const RootedTree& t, const VertexSet& S, int rho_prime, int K);
bool is_antichain(const RootedTree& t, const VertexSet& a);

}  // namespace botlab
