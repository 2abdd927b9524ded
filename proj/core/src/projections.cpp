#include "botlab/projections.hpp"

#include "botlab/error.hpp"

#include <algorithm>
#include <cmath>

namespace botlab {

namespace {

constexpr std::size_t kMaxBasisEntries = std::size_t{1} << 26;

// Rows r_i = sum_z J(z) b_i(z_L) f(z_I) folded into a vector over [q]^{L_u}.
Eigen::VectorXd weighted_leaf_marginal(const RootedTree& t, const TransitionChain& c, int u, const Domain& leaves,
                                       const DenseFunction& f) {
    const Domain d = domain_union(f.domain, leaves);
    const DenseFunction joint = subtree_law(t, c, u, d);
    const DenseFunction h = multiply(joint, lift(f, d));
    return restrict_sum(h, leaves).values;
}

}  // namespace

Projection::Projection(const RootedTree& t, const TransitionChain& c, int u, int K)
    : t_(&t), c_(&c), u_(u), basis_(tk_basis(t, c, u, K)) {
    law_ = subtree_law(t, c, u, basis_.domain);
    const Eigen::MatrixXd& B = basis_.vectors;
    gram_ = B.transpose() * law_.values.asDiagonal() * B;
    pinv_ = psd_pinv(gram_, 1e-10, &rank_);
}

Eigen::VectorXd Projection::coefficients(const DenseFunction& f) const {
    for (int v : f.domain)
        if (!t_->is_below(v, u_)) throw Error(Errc::DomainMismatch, "Π input outside the subtree");
    Eigen::VectorXd w;
    if (f.domain == basis_.domain)
        w = law_.values.cwiseProduct(f.values);
    else
        w = weighted_leaf_marginal(*t_, *c_, u_, basis_.domain, f);
    return pinv_ * (basis_.vectors.transpose() * w);
}

DenseFunction Projection::apply(const DenseFunction& f) const {
    return DenseFunction(basis_.domain, basis_.q, basis_.vectors * coefficients(f));
}

Eigen::MatrixXd Projection::apply_columns(const Eigen::MatrixXd& x) const {
    const Eigen::MatrixXd& B = basis_.vectors;
    return B * (pinv_ * (B.transpose() * (law_.values.asDiagonal() * x)));
}

DenseFunction Projection::apply_block(const DenseFunction& f) const {
    return botlab::apply_block(f, basis_.domain, basis_.domain,
                               [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return apply_columns(x); });
}

LinearMapMatrix Projection::matrix(std::optional<Domain> input) const {
    const Domain in = input ? *input : basis_.domain;
    for (int v : in)
        if (!t_->is_below(v, u_)) throw Error(Errc::DomainMismatch, "Π input outside the subtree");
    const std::size_t rows = basis_.vectors.rows();
    const std::size_t cols = checked_states(c_->q(), in.size(), "Π input");
    if (rows * cols > kMaxBasisEntries) throw Error(Errc::SizeLimit, "Π matrix too large");
    Eigen::MatrixXd cmap(basis_.dim(), static_cast<Eigen::Index>(cols));
    if (in == basis_.domain) {
        cmap = basis_.vectors.transpose() * law_.values.asDiagonal();
    } else {
        const Domain d = domain_union(in, basis_.domain);
        const DenseFunction joint = subtree_law(*t_, *c_, u_, d);
        for (int i = 0; i < basis_.dim(); ++i) {
            const DenseFunction h = multiply(joint, lift(basis_.vector(i), d));
            cmap.row(i) = restrict_sum(h, in).values.transpose();
        }
    }
    return LinearMapMatrix{in, basis_.domain, c_->q(), basis_.vectors * (pinv_ * cmap)};
}

StrongProjection::StrongProjection(const RootedTree& t, const TransitionChain& c, int u, int K)
    : t_(&t), c_(&c), u_(u), basis_(tk_basis(t, c, u, K)) {
    const Eigen::MatrixXd kernel = conditional_kernel(t, c, u, basis_.domain);
    const Eigen::MatrixXd& B = basis_.vectors;
    for (int th = 0; th < c.q(); ++th) {
        Eigen::VectorXd p = kernel.row(th).transpose();
        Eigen::MatrixXd bt = B.transpose() * p.asDiagonal();
        Eigen::MatrixXd g = bt * B;
        coef_.push_back(psd_pinv(g) * bt);
    }
}

DenseFunction StrongProjection::gamma(const DenseFunction& f, int theta) const {
    if (f.domain != basis_.domain) throw Error(Errc::DomainMismatch, "Γ acts on functions of L_u");
    return DenseFunction(basis_.domain, basis_.q, basis_.vectors * (coef_[theta] * f.values));
}

DenseFunction StrongProjection::apply_block(const DenseFunction& f) const {
    const int q = c_->q();
    const Domain out = domain_union({u_}, basis_.domain);
    return botlab::apply_block(f, basis_.domain, out, [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
        const Eigen::Index n = x.rows();
        Eigen::MatrixXd y(n * q, x.cols());
        // u precedes its leaves, so θ is the slowest index of the output block.
        for (int th = 0; th < q; ++th) y.middleRows(th * n, n) = basis_.vectors * (coef_[th] * x);
        return y;
    });
}

DenseFunction StrongProjection::apply(const DenseFunction& f) const {
    if (f.domain != basis_.domain) throw Error(Errc::DomainMismatch, "P_T acts on functions of L_u");
    return apply_block(f);
}

LinearMapMatrix StrongProjection::matrix() const {
    const int q = c_->q();
    const Eigen::Index n = basis_.vectors.rows();
    if (static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * q > kMaxBasisEntries)
        throw Error(Errc::SizeLimit, "P_T matrix too large");
    Eigen::MatrixXd e(n * q, n);
    for (int th = 0; th < q; ++th) e.middleRows(th * n, n) = basis_.vectors * coef_[th];
    return LinearMapMatrix{basis_.domain, domain_union({u_}, basis_.domain), q, std::move(e)};
}

DmProjection::DmProjection(const RootedTree& t, const TransitionChain& c, int u, int m, int K) : dm_(dm_set(t, u, m)) {
    for (int v : dm_) parts_.emplace_back(t, c, v, K);
}

DenseFunction DmProjection::apply(const DenseFunction& f) const {
    DenseFunction g = f;
    for (const auto& p : parts_) g = p.apply_block(g);
    return g;
}

LinearMapMatrix DmProjection::matrix() const {
    LinearMapMatrix acc{{}, {}, parts_.empty() ? 2 : parts_.front().basis().q, Eigen::MatrixXd::Ones(1, 1)};
    for (const auto& p : parts_) acc = kron(acc, p.matrix());
    return acc;
}

LinearMapMatrix projection_pi(const RootedTree& t, const TransitionChain& c, int u, int K) {
    return Projection(t, c, u, K).matrix();
}

LinearMapMatrix strong_projection_pt(const RootedTree& t, const TransitionChain& c, int u, int K) {
    return StrongProjection(t, c, u, K).matrix();
}

LinearMapMatrix p_dm_operator(const RootedTree& t, const TransitionChain& c, int u, int m, int K) {
    return DmProjection(t, c, u, m, K).matrix();
}

SubspaceBasis r_space_basis(const RootedTree& t, const TransitionChain& c, int u, const SubspaceBasis& W, int k, int K) {
    if (k < 0) throw Error(Errc::InvalidArgument, "k must be >= 0");
    if (t.ancestor(u, k) < 0) throw Error(Errc::NoSuchAncestor, "anc(u,k) does not exist");
    if (W.domain != t.leaves_below(u)) throw Error(Errc::DomainMismatch, "W must live on L_u");
    Projection p0(t, c, u, K);
    SubspaceBasis cur = W;
    cur.vectors = W.vectors - p0.apply_columns(W.vectors);
    cur = orthonormalize(cur, 1e-10, W.vectors.size() ? W.vectors.colwise().norm().maxCoeff() : 0.0);
    for (int j = 1; j <= k; ++j) {
        const int a = t.ancestor(u, j);
        SubspaceBasis tt = tt_basis(t, c.q(), o_set(t, u, j - 1), K);
        const std::size_t rows = checked_states(c.q(), t.leaf_count(a), "R-space");
        if (rows * static_cast<std::size_t>(cur.dim()) * static_cast<std::size_t>(tt.dim()) > kMaxBasisEntries)
            throw Error(Errc::SizeLimit, "R-space spanning set too large");
        SubspaceBasis x = tensor_basis({cur, tt});
        Projection pa(t, c, a, K);
        const double before = x.vectors.size() ? x.vectors.colwise().norm().maxCoeff() : 0.0;
        x.vectors -= pa.apply_columns(x.vectors);
        cur = orthonormalize(x, 1e-10, before);
    }
    // gram rank under E_{anc(u,k)}
    const DenseFunction law = subtree_law(t, c, t.ancestor(u, k), cur.domain);
    int rank = 0;
    psd_pinv(cur.vectors.transpose() * law.values.asDiagonal() * cur.vectors, 1e-10, &rank);
    cur.gram_rank = rank;
    return cur;
}

DenseFunction r_chain_apply(const std::vector<const Projection*>& chain_projections, const DenseFunction& f) {
    DenseFunction g = f;
    for (const Projection* p : chain_projections) g = subtract(g, p->apply_block(g));
    return g;
}

RMembership::RMembership(const RootedTree& t, const TransitionChain& c, int u, const SubspaceBasis& W, int k, int K) {
    if (t.ancestor(u, k) < 0) throw Error(Errc::NoSuchAncestor, "anc(u,k) does not exist");
    const int a = t.ancestor(u, k);
    domain_ = t.leaves_below(a);
    top_ = std::make_unique<Projection>(t, c, a, K);
    if (k == 0) {
        x_factors_.push_back(orthonormalize(W));
    } else {
        x_factors_.push_back(r_space_basis(t, c, u, W, k - 1, K));
        for (int v : o_set(t, u, k - 1)) x_factors_.push_back(orthonormalize(indicator_basis(t.leaves_below(v), c.q(), 1 << K)));
    }
    const SubspaceBasis& z = top_->basis();
    SubspaceBasis zp = z;
    for (int i = 0; i < z.dim(); ++i) {
        const DenseFunction zi = z.vector(i);
        zp.vectors.col(i) = subtract(zi, tensor_project(zi, x_factors_)).values;
    }
    z_perp_ = orthonormalize(zp, 1e-10, z.vectors.size() ? z.vectors.colwise().norm().maxCoeff() : 0.0);
}

double RMembership::residual(const DenseFunction& f) const {
    if (f.domain != domain_) throw Error(Errc::DomainMismatch, "membership test needs a function of L_{anc(u,k)}");
    const double scale = std::max(1.0, max_norm(f));
    const double r1 = max_norm(top_->apply(f));
    const DenseFunction g = subtract(f, tensor_project(f, x_factors_));
    const double r2 = span_residual(g, z_perp_);
    return std::max(r1, r2) / scale;
}

}  // namespace botlab
