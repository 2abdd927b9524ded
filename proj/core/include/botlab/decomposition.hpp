#pragma once

#include "botlab/projections.hpp"

#include <map>
#include <memory>
#include <vector>

namespace botlab {

struct DecompositionResult {
    int base_vertex = 0;
    int K = 0;
    int h_probe = 0;
    std::map<int, DenseFunction> components;  // u -> f_u over L_{ρ'}
    std::map<int, int> layer_index;           // u -> k_u
    std::map<int, double> membership;         // u -> dR(u) membership residual
    double residual = 0.0;                    // maxnorm(Σ f_u - f)
};

// Bottom-up decomposition of a degree <= 2^{K+1} polynomial over L_{ρ'} into
// components f_u in dR(u) = R(W_u; k_{ρ'} - k_u), with relative height
// k_u = h(u) - h_probe.  Operators and membership tests are built once and
// reused across calls.
class Decomposer {
public:
    Decomposer(const RootedTree& t, const TransitionChain& c, int rho_prime, int K, int h_probe);
    ~Decomposer();

    DecompositionResult decompose(const EsPolynomial& f, bool check_membership = true) const;
    // V_t for t = 0..k_{ρ'}.
    const std::vector<VertexSet>& layers() const { return layers_; }
    int relative_height(int u) const { return t_->height(u) - h_probe_; }
    const Domain& leaves() const { return leaves_; }

private:
    const RootedTree* t_;
    const TransitionChain* c_;
    int rho_, K_, h_probe_, k_top_;
    Domain leaves_;
    std::vector<VertexSet> layers_;
    std::map<int, std::unique_ptr<Projection>> proj_;
    std::map<int, std::unique_ptr<RMembership>> member_;
    std::vector<SubspaceBasis> top_factors_;
};

DecompositionResult decompose_f(const RootedTree& t, const TransitionChain& c, int rho_prime, int K,
                                const EsPolynomial& f, int h_probe);

struct PairMeta {
    int k_u = 0, k_v = 0, k_w = 0;
};

struct PairwiseReport {
    VertexSet vertices;        // component order
    Eigen::MatrixXd e_table;   // |E_{ρ'}[f_u g_v]|
    Eigen::MatrixXd d_table;   // maxnorm(D_{ρ'}[f_u g_v])
    Eigen::MatrixXd u_norms;   // column 0: ||f_u||_{ρ'}, column 1: ||g_u||_{ρ'}
    std::vector<std::vector<PairMeta>> meta;
    double cauchy_schwarz_slack = 0.0;  // max of |E[f_u g_v]| - ||f_u|| ||g_v||
};

PairwiseReport pairwise_report(const RootedTree& t, const TransitionChain& c, const DecompositionResult& f,
                               const DecompositionResult* g = nullptr);

}  // namespace botlab
