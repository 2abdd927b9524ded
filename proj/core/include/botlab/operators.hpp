#pragma once

#include "botlab/broadcast.hpp"
#include "botlab/chain.hpp"
#include "botlab/function_space.hpp"
#include "botlab/tree.hpp"

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

namespace botlab {

// Explicit matrix of a linear map F([q]^input) -> F([q]^output).
struct LinearMapMatrix {
    Domain input_domain;
    Domain output_domain;
    int q = 2;
    Eigen::MatrixXd entries;  // rows: output states, cols: input states

    // f must contain the input domain; other variables are carried through.
    DenseFunction apply(const DenseFunction& f) const;
};

LinearMapMatrix compose(const LinearMapMatrix& outer, const LinearMapMatrix& inner);
// Kronecker assembly of two maps on disjoint domains.
LinearMapMatrix kron(const LinearMapMatrix& a, const LinearMapMatrix& b);

enum class OpKind { E, Ehat, D, I };

// Ê_u / E_u / D_u / identity on functions of `input` (default: L_u).
LinearMapMatrix cond_expect_op(const RootedTree& t, const TransitionChain& c, int u, OpKind kind,
                               std::optional<Domain> input = std::nullopt);
// Tensor product over an antichain; `input` is split among the members' subtrees
// (default: all leaves below A).
LinearMapMatrix antichain_tensor(const RootedTree& t, const TransitionChain& c,
                                 const std::vector<std::pair<int, OpKind>>& ops,
                                 std::optional<Domain> input = std::nullopt);

// Product of independent stationary subtree laws over the antichain A, on `domain`.
DenseFunction antichain_law(const RootedTree& t, const TransitionChain& c, const VertexSet& A, const Domain& domain);
// Ê_A f as a function of x_A.
DenseFunction cond_expect(const RootedTree& t, const TransitionChain& c, const VertexSet& A, const DenseFunction& f);
// E_A f.
double expect_antichain(const RootedTree& t, const TransitionChain& c, const VertexSet& A, const DenseFunction& f);
// D_A f = (⊗ D_v) f as a function of x_A.
DenseFunction diff_op(const RootedTree& t, const TransitionChain& c, const VertexSet& A, const DenseFunction& f);

enum class NormKind { Max, U, T };
// U-norm sqrt(E_A f^2).
double u_norm(const RootedTree& t, const TransitionChain& c, const VertexSet& A, const DenseFunction& f);
// T-norm for f over D_m(u) and L_u: D_m coordinates follow the process on T_u,
// leaf coordinates follow independent processes below each v in D_m(u).
double t_norm(const RootedTree& t, const TransitionChain& c, int u, int m, const DenseFunction& f);
DenseFunction t_norm_law(const RootedTree& t, const TransitionChain& c, int u, int m);

struct NormContext {
    VertexSet A;  // U-norm antichain
    int u = 0;    // T-norm vertex
    int m = 0;    // T-norm sub-depth
};
double norm_eval(NormKind kind, const DenseFunction& f, const RootedTree& t, const TransitionChain& c,
                 const NormContext& ctx);

// Largest singular value of the symmetric bilinear form (f,g) -> (D_A[fg])(x),
// maximised over x, in E_A-orthonormal coordinates of span(basis).  Radical
// directions below the cutoff are dropped.
double bilinear_decay_constant(const RootedTree& t, const TransitionChain& c, const VertexSet& A,
                               const SubspaceBasis& basis, double cutoff = 1e-10);

// Moore-Penrose pseudo-inverse of a symmetric PSD matrix by eigendecomposition
// (eigenvalues below cutoff * max(1, top) are treated as zero).
Eigen::MatrixXd psd_pinv(const Eigen::MatrixXd& g, double cutoff = 1e-10, int* rank = nullptr);

}  // namespace botlab
