#include "botlab/tree.hpp"

#include "botlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace botlab {

void RootedTree::finalize() {
    const int nv = n();
    children_.assign(nv, {});
    layer_.assign(nv, 0);
    for (int v = 1; v < nv; ++v) {
        children_[parent_[v]].push_back(v);
        layer_[v] = layer_[parent_[v]] + 1;
    }
    depth_ = nv ? *std::max_element(layer_.begin(), layer_.end()) : 0;
    for (int v = 0; v < nv; ++v)
        if (layer_[v] < depth_ && children_[v].empty())
            throw Error(Errc::InvalidTree, "vertex " + std::to_string(v) + " above the bottom layer has no child");
    leaf_lo_.assign(nv, 0);
    leaf_hi_.assign(nv, 0);
    for (int v = nv - 1; v >= 0; --v) {
        if (children_[v].empty()) {
            leaf_lo_[v] = leaf_hi_[v] = v;
        } else {
            leaf_lo_[v] = leaf_lo_[children_[v].front()];
            leaf_hi_[v] = leaf_hi_[children_[v].back()];
        }
    }
}

int RootedTree::ancestor(int u, int k) const {
    if (k < 0) return -1;
    while (k-- > 0) {
        u = parent_[u];
        if (u < 0) return -1;
    }
    return u;
}

bool RootedTree::is_below(int u, int a) const {
    if (layer_[u] < layer_[a]) return false;
    return ancestor(u, layer_[u] - layer_[a]) == a;
}

VertexSet RootedTree::leaves_below(int u) const {
    VertexSet out;
    out.reserve(leaf_count(u));
    for (int v = leaf_lo_[u]; v <= leaf_hi_[u]; ++v) out.push_back(v);
    return out;
}

VertexSet RootedTree::descendants_at(int u, int k) const {
    VertexSet cur{u};
    for (int i = 0; i < k; ++i) {
        VertexSet next;
        for (int v : cur)
            for (int c : children_[v]) next.push_back(c);
        cur.swap(next);
    }
    return cur;
}

int RootedTree::first_at_height(int h) const {
    for (int v = 0; v < n(); ++v)
        if (height(v) == h) return v;
    return -1;
}

RootedTree build_dary(int d, int depth) {
    if (d < 1 || depth < 0) throw Error(Errc::InvalidArgument, "need d >= 1 and depth >= 0");
    const std::size_t cap = size_cap();
    std::size_t total = 0, layer = 1;
    for (int l = 0; l <= depth; ++l) {
        total += layer;
        if (total > cap) throw Error(Errc::SizeLimit, "tree exceeds the vertex cap");
        if (l < depth) {
            if (layer > cap / static_cast<std::size_t>(d)) throw Error(Errc::SizeLimit, "tree exceeds the vertex cap");
            layer *= static_cast<std::size_t>(d);
        }
    }
    RootedTree t;
    t.parent_.assign(total, -1);
    for (std::size_t v = 1; v < total; ++v) t.parent_[v] = static_cast<int>((v - 1) / d);
    t.finalize();
    return t;
}

RootedTree tree_from_parents(const std::vector<int>& parent) {
    if (parent.empty() || parent[0] != -1) throw Error(Errc::InvalidTree, "parent[0] must be -1");
    if (parent.size() > size_cap()) throw Error(Errc::SizeLimit, "tree exceeds the vertex cap");
    for (std::size_t v = 1; v < parent.size(); ++v)
        if (parent[v] < 0 || parent[v] >= static_cast<int>(v) || (v > 1 && parent[v] < parent[v - 1]))
            throw Error(Errc::InvalidTree, "parent array is not in breadth-first order");
    RootedTree t;
    t.parent_ = parent;
    t.finalize();
    return t;
}

RootedTree tree_from_edges(int n, const std::vector<std::pair<int, int>>& edges, int root) {
    if (n < 1) throw Error(Errc::InvalidTree, "empty tree");
    if (static_cast<std::size_t>(n) > size_cap()) throw Error(Errc::SizeLimit, "tree exceeds the vertex cap");
    if (root < 0 || root >= n) throw Error(Errc::InvalidTree, "root out of range");
    if (static_cast<int>(edges.size()) != n - 1) throw Error(Errc::InvalidTree, "a tree on n vertices has n-1 edges");
    std::vector<std::vector<int>> kids(n);
    std::vector<int> par(n, -1);
    for (auto [p, c] : edges) {
        if (p < 0 || p >= n || c < 0 || c >= n || p == c) throw Error(Errc::InvalidTree, "edge endpoint out of range");
        if (par[c] != -1 || c == root) throw Error(Errc::InvalidTree, "vertex with two parents");
        par[c] = p;
        kids[p].push_back(c);
    }
    std::vector<int> order;
    std::vector<int> new_id(n, -1);
    std::deque<int> queue{root};
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        new_id[v] = static_cast<int>(order.size());
        order.push_back(v);
        for (int c : kids[v]) queue.push_back(c);
    }
    if (static_cast<int>(order.size()) != n) throw Error(Errc::InvalidTree, "edges do not form a single rooted tree");
    std::vector<int> parent(n, -1);
    for (int i = 1; i < n; ++i) parent[i] = new_id[par[order[i]]];
    return tree_from_parents(parent);
}

RootedTree build_path(int length) { return build_dary(1, length); }

bool check_degree_dominated(const RootedTree& t, int d, double R) {
    for (int u = 0; u < t.n(); ++u) {
        VertexSet cur{u};
        for (int k = 1; k <= t.height(u); ++k) {
            VertexSet next;
            for (int v : cur)
                for (int c : t.children(v)) next.push_back(c);
            cur.swap(next);
            if (static_cast<double>(cur.size()) > R * std::pow(static_cast<double>(d), k)) return false;
        }
    }
    return true;
}

VertexSet o_set(const RootedTree& t, int u, int k) {
    if (k < -1) throw Error(Errc::InvalidArgument, "k must be >= -1");
    if (k == -1) return t.children(u);
    const int top = t.ancestor(u, k + 1);
    if (top < 0) throw Error(Errc::NoSuchAncestor, "anc(u,k+1) does not exist");
    const int skip = t.ancestor(u, k);
    VertexSet out;
    for (int c : t.children(top))
        if (c != skip) out.push_back(c);
    return out;
}

VertexSet dm_set(const RootedTree& t, int u, int m) {
    if (m < 0) throw Error(Errc::InvalidArgument, "m must be >= 0");
    if (t.height(u) < m) throw Error(Errc::TooShallow, "h(u) < m");
    return t.descendants_at(u, m);
}

int nearest_common_ancestor(const RootedTree& t, int u, int v) {
    while (t.layer(u) > t.layer(v)) u = t.parent(u);
    while (t.layer(v) > t.layer(u)) v = t.parent(v);
    while (u != v) {
        u = t.parent(u);
        v = t.parent(v);
    }
    return u;
}

int nearest_common_ancestor(const RootedTree& t, const VertexSet& s) {
    if (s.empty()) return t.root();
    int w = s.front();
    for (int v : s) w = nearest_common_ancestor(t, w, v);
    return w;
}

int pivot_vertex(const RootedTree& t, const VertexSet& S, int rho_prime, int K) {
    const long cap = 1L << K;
    if (static_cast<long>(S.size()) > 2 * cap) throw Error(Errc::TooLarge, "|S| > 2^(K+1)");
    for (int s : S)
        if (!t.is_leaf(s) || !t.is_below(s, rho_prime)) throw Error(Errc::NotBelow, "S is not inside L_rho'");
    int p = rho_prime;
    for (;;) {
        int next = -1;
        for (int c : t.children(p)) {
            auto [lo, hi] = t.leaf_range(c);
            long cnt = std::count_if(S.begin(), S.end(), [&](int s) { return s >= lo && s <= hi; });
            if (cnt > cap) {
                next = c;
                break;
            }
        }
        if (next < 0) return p;
        p = next;
    }
}

bool is_antichain(const RootedTree& t, const VertexSet& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j)
            if (i != j && (a[i] == a[j] || t.is_below(a[i], a[j]))) return false;
    return true;
}

}  // namespace botlab
