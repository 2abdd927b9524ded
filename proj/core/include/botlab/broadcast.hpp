#pragma once

#include "botlab/chain.hpp"
#include "botlab/function_space.hpp"
#include "botlab/tree.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace botlab {

// Vertex states; -1 marks an unassigned vertex.
struct Labeling {
    std::vector<int> state;

    Labeling() = default;
    explicit Labeling(int n) : state(static_cast<std::size_t>(n), -1) {}
    bool has(int v) const { return v >= 0 && v < static_cast<int>(state.size()) && state[v] >= 0; }
};

struct RootInit {
    bool stationary = true;
    int state = 0;
    static RootInit fixed(int s) { return RootInit{false, s}; }
};

// Per-sample generator derived from (seed, index).
std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t index);
double uniform01(std::mt19937_64& rng);
int draw_state(std::mt19937_64& rng, const double* probs, int q);

Labeling sample_labeling(const RootedTree& t, const TransitionChain& c, RootInit init, std::uint64_t seed,
                         std::uint64_t index = 0);
double joint_probability(const RootedTree& t, const TransitionChain& c, const Labeling& x, RootInit init);

// P(Y_U = y | Y_u = x) for U inside the subtree of u (U may contain u and
// internal vertices).  Rows: x in [q]; columns: [q]^U in ascending-id order.
Eigen::MatrixXd conditional_kernel(const RootedTree& t, const TransitionChain& c, int u, const Domain& U);
// Law of Y_U for the process on the subtree of u started from Y_u ~ pi.
DenseFunction subtree_law(const RootedTree& t, const TransitionChain& c, int u, const Domain& U);
// Exact law of X_targets under the stationary broadcast, optionally conditioned on X_v = s.
DenseFunction steiner_marginal(const RootedTree& t, const TransitionChain& c, const Domain& targets,
                               std::optional<std::pair<int, int>> condition = std::nullopt);

}  // namespace botlab
