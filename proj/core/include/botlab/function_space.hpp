#pragma once

#include "botlab/tree.hpp"

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <vector>

namespace botlab {

class TransitionChain;

// Ordered (ascending) set of vertex ids.  Tables over [q]^Domain are flattened
// lexicographically with the last vertex varying fastest.
using Domain = std::vector<int>;

Domain domain_union(const Domain& a, const Domain& b);
Domain domain_minus(const Domain& a, const Domain& b);
bool domain_subset(const Domain& sub, const Domain& full);
bool domain_disjoint(const Domain& a, const Domain& b);
std::size_t ipow(int q, std::size_t n);

// Flat offsets in `full` of every assignment of `sub` (sub in its own order).
std::vector<std::size_t> offsets(const Domain& full, const Domain& sub, int q);

struct DenseFunction {
    Domain domain;
    int q = 2;
    Eigen::VectorXd values;

    DenseFunction() = default;
    DenseFunction(Domain d, int q_, Eigen::VectorXd v);
    static DenseFunction constant(const Domain& d, int q, double c);
    static DenseFunction zero(const Domain& d, int q) { return constant(d, q, 0.0); }
    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
    double at(const std::vector<int>& states) const;
};

struct LocalFunction {
    VertexSet support;
    std::vector<double> table;
};

struct EsPolynomial {
    int q = 2;
    std::vector<LocalFunction> terms;
};

int es_degree(const EsPolynomial& f);
void validate_local(const LocalFunction& phi, int q);
DenseFunction to_dense(const LocalFunction& phi, const Domain& domain, int q);
DenseFunction to_dense(const EsPolynomial& f, const Domain& domain);
DenseFunction tensor_identify(const std::vector<DenseFunction>& parts);

DenseFunction lift(const DenseFunction& f, const Domain& superset);
DenseFunction restrict_sum(const DenseFunction& f, const Domain& keep);  // marginalise other variables
DenseFunction slice(const DenseFunction& f, int vertex, int state);
DenseFunction add(const DenseFunction& f, const DenseFunction& g);
DenseFunction subtract(const DenseFunction& f, const DenseFunction& g);
DenseFunction multiply(const DenseFunction& f, const DenseFunction& g);
DenseFunction scale(const DenseFunction& f, double c);
double max_norm(const DenseFunction& f);
// Sum over the law's domain of law(z) * f(z restricted to f's domain).
double expect(const DenseFunction& law, const DenseFunction& f);

// Apply an operator on a block of variables, holding the remaining ones fixed.
// `op` maps a (|[q]^in| x r) matrix of columns to a (|[q]^out| x r) matrix.
using BlockMap = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;
DenseFunction apply_block(const DenseFunction& f, const Domain& in, const Domain& out, const BlockMap& op);

// Columns span a subspace of functions over `domain`.
struct SubspaceBasis {
    Domain domain;
    int q = 2;
    Eigen::MatrixXd vectors;
    int gram_rank = -1;

    int dim() const { return static_cast<int>(vectors.cols()); }
    DenseFunction vector(int i) const { return DenseFunction(domain, q, vectors.col(i)); }
};

// Indicator lifts 1[x_S = s] over S of size <= max_support, greedily reduced in
// lexicographic order (size, subset, states).  The greedy survivors are exactly
// the lifts whose states avoid q-1.
SubspaceBasis indicator_basis(const Domain& vars, int q, int max_support);
// Generic greedy reduction of an arbitrary spanning set (used as a test oracle).
SubspaceBasis greedy_reduce(const SubspaceBasis& spanning, double tol = 1e-10);
SubspaceBasis tensor_basis(const std::vector<SubspaceBasis>& parts);
// Euclidean orthonormal basis of the span (rank-revealing, tolerance relative to the largest singular value).
// Directions with singular value below tol * max(σ_max, scale) are dropped;
// `scale` lets callers measure against the size of the input before a projection.
SubspaceBasis orthonormalize(const SubspaceBasis& b, double tol = 1e-10, double scale = 0.0);
// max |f - P f| with P the Euclidean projector onto an orthonormal basis.
double span_residual(const DenseFunction& f, const SubspaceBasis& orthonormal);

// Mode-wise projector membership for tensor-product subspaces.  Each factor is an
// orthonormal basis over a block of f's domain; blocks must partition the domain.
DenseFunction tensor_project(const DenseFunction& f, const std::vector<SubspaceBasis>& orthonormal_factors);
double tensor_residual(const DenseFunction& f, const std::vector<SubspaceBasis>& orthonormal_factors);

// T_K(u): indicator basis on L_u with supports of size <= 2^K.  gram_rank is the
// rank of its Gram matrix under the E_u form.
SubspaceBasis tk_basis(const RootedTree& t, const TransitionChain& c, int u, int K);
// Product basis of T_K over an antichain (the space often written TT).
SubspaceBasis tt_basis(const RootedTree& t, int q, const VertexSet& a, int K);

}  // namespace botlab
