#pragma once

#include "botlab/operators.hpp"

#include <memory>
#include <vector>

namespace botlab {

// Π_{u,K}: projection-like map onto span T_K(u) under the E_u form, built from
// the Gram pseudo-inverse (canonical minimal-norm coefficients).
class Projection {
public:
    Projection(const RootedTree& t, const TransitionChain& c, int u, int K);

    int vertex() const { return u_; }
    const SubspaceBasis& basis() const { return basis_; }
    const Eigen::MatrixXd& gram() const { return gram_; }
    int gram_rank() const { return rank_; }

    // Coefficients c = G^+ r with r_i = E_u[b_i f], f a function of variables in T_u.
    Eigen::VectorXd coefficients(const DenseFunction& f) const;
    // Π f as a function of L_u; f may depend on any variables of T_u.
    DenseFunction apply(const DenseFunction& f) const;
    // (Π ⊗ I) f: acts on the L_u block, other variables of f held fixed.
    DenseFunction apply_block(const DenseFunction& f) const;
    // Π applied to each column of a matrix over [q]^{L_u}.
    Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& x) const;
    LinearMapMatrix matrix(std::optional<Domain> input = std::nullopt) const;

private:
    const RootedTree* t_;
    const TransitionChain* c_;
    int u_;
    SubspaceBasis basis_;
    DenseFunction law_;  // law of Y_{L_u} with Y_u ~ pi
    Eigen::MatrixXd gram_, pinv_;
    int rank_ = 0;
};

// Strong projection P_T at u: on the fibre x_u = θ, applies Γ_{u,θ}, the
// projection built from the form (f,g) -> Ê_u[fg](θ).
class StrongProjection {
public:
    StrongProjection(const RootedTree& t, const TransitionChain& c, int u, int K);

    int vertex() const { return u_; }
    const SubspaceBasis& basis() const { return basis_; }
    // Γ_{u,θ} f on L_u.
    DenseFunction gamma(const DenseFunction& f, int theta) const;
    // P_T f on {u} ∪ L_u; f on L_u.
    DenseFunction apply(const DenseFunction& f) const;
    // Acts on the L_u block of f, adding the variable u.
    DenseFunction apply_block(const DenseFunction& f) const;
    LinearMapMatrix matrix() const;

private:
    const RootedTree* t_;
    const TransitionChain* c_;
    int u_;
    SubspaceBasis basis_;
    std::vector<Eigen::MatrixXd> coef_;  // per θ: G_θ^+ B^T diag(P(.|θ))
};

// P_{D_m(u)} = ⊗_{v ∈ D_m(u)} P_T at v.
class DmProjection {
public:
    DmProjection(const RootedTree& t, const TransitionChain& c, int u, int m, int K);
    const VertexSet& dm() const { return dm_; }
    // f on L_u (or a superset, other variables carried); output adds D_m(u).
    DenseFunction apply(const DenseFunction& f) const;
    LinearMapMatrix matrix() const;

private:
    VertexSet dm_;
    std::vector<StrongProjection> parts_;
};

LinearMapMatrix projection_pi(const RootedTree& t, const TransitionChain& c, int u, int K);
LinearMapMatrix strong_projection_pt(const RootedTree& t, const TransitionChain& c, int u, int K);
LinearMapMatrix p_dm_operator(const RootedTree& t, const TransitionChain& c, int u, int m, int K);

// Orthonormal spanning set of R(W;k) over L_{anc(u,k)}:
// R(W;0) = (I - Π_u) W,  R(W;k) = (I - Π_{anc(u,k)}) (R(W;k-1) ⊗ TT(u,k-1)).
SubspaceBasis r_space_basis(const RootedTree& t, const TransitionChain& c, int u, const SubspaceBasis& W, int k, int K);

// Applies (I - Π_{anc(u,k)}) ... (I - Π_u) blockwise to a function over a
// superset of L_{anc(u,k)}; the constructive step of the R-space decomposition.
DenseFunction r_chain_apply(const std::vector<const Projection*>& chain_projections, const DenseFunction& f);

// Membership test for R(W;k).  f lies in R(W;k) iff Π_{anc(u,k)} f = 0 and
// f ∈ X + T_K(anc(u,k)) with X = R(W;k-1) ⊗ TT(u,k-1) (X = W when k = 0).
// Exact for strictly positive chains; modulo the radical of T_K otherwise.
class RMembership {
public:
    RMembership(const RootedTree& t, const TransitionChain& c, int u, const SubspaceBasis& W, int k, int K);
    // Largest of the two residuals, relative to max(1, maxnorm f).
    double residual(const DenseFunction& f) const;
    const Domain& domain() const { return domain_; }

private:
    Domain domain_;
    std::unique_ptr<Projection> top_;
    std::vector<SubspaceBasis> x_factors_;
    SubspaceBasis z_perp_;  // orthonormal basis of (I - P_X) T_K(anc(u,k))
};

}  // namespace botlab
