#include "botlab/decomposition.hpp"

#include "botlab/error.hpp"

#include <algorithm>
#include <cmath>

namespace botlab {

namespace {

constexpr std::size_t kDecompositionStates = std::size_t{1} << 16;

}  // namespace

Decomposer::Decomposer(const RootedTree& t, const TransitionChain& c, int rho_prime, int K, int h_probe)
    : t_(&t), c_(&c), rho_(rho_prime), K_(K), h_probe_(h_probe) {
    if (rho_prime < 0 || rho_prime >= t.n()) throw Error(Errc::InvalidArgument, "ρ' out of range");
    if (K < 0) throw Error(Errc::InvalidArgument, "K must be >= 0");
    k_top_ = t.height(rho_prime) - h_probe;
    if (k_top_ < 0 || h_probe < 0) throw Error(Errc::InvalidArgument, "relative height of ρ' must be >= 0");
    leaves_ = t.leaves_below(rho_prime);
    checked_states(c.q(), leaves_.size(), std::min(size_cap(), kDecompositionStates), "decomposition leaf set");

    layers_.assign(static_cast<std::size_t>(k_top_) + 1, {});
    for (int t_idx = 0; t_idx <= k_top_; ++t_idx)
        layers_[t_idx] = t.descendants_at(rho_prime, k_top_ - t_idx);

    if (k_top_ == 0) {
        top_factors_.push_back(orthonormalize(indicator_basis(leaves_, c.q(), 1 << (K + 1))));
        return;
    }
    for (int t_idx = 0; t_idx <= k_top_; ++t_idx)
        for (int v : layers_[t_idx]) proj_[v] = std::make_unique<Projection>(t, c, v, K);
    for (int v : layers_[0])
        member_[v] = std::make_unique<RMembership>(t, c, v, tk_basis(t, c, v, K + 1), k_top_, K);
    for (int t_idx = 1; t_idx < k_top_; ++t_idx)
        for (int v : layers_[t_idx])
            member_[v] = std::make_unique<RMembership>(t, c, v, tt_basis(t, c.q(), t.children(v), K), k_top_ - t_idx, K);
    for (int ch : t.children(rho_prime))
        top_factors_.push_back(orthonormalize(indicator_basis(t.leaves_below(ch), c.q(), 1 << K)));
}

Decomposer::~Decomposer() = default;

DecompositionResult Decomposer::decompose(const EsPolynomial& f, bool check_membership) const {
    const RootedTree& t = *t_;
    if (f.q != c_->q()) throw Error(Errc::DomainMismatch, "polynomial and chain disagree on q");
    if (es_degree(f) > (1 << (K_ + 1))) throw Error(Errc::DegreeTooHigh, "degree exceeds 2^(K+1)");

    DecompositionResult r;
    r.base_vertex = rho_;
    r.K = K_;
    r.h_probe = h_probe_;
    for (const auto& layer : layers_)
        for (int v : layer) {
            r.components.emplace(v, DenseFunction::zero(leaves_, c_->q()));
            r.layer_index[v] = relative_height(v);
        }

    std::map<int, DenseFunction> phi;
    auto accumulate = [&](int v, const DenseFunction& g) {
        auto it = phi.find(v);
        if (it == phi.end())
            phi.emplace(v, g);
        else
            it->second.values += g.values;
    };
    DenseFunction total = DenseFunction::zero(leaves_, c_->q());
    for (const auto& term : f.terms) {
        DenseFunction dense = to_dense(term, leaves_, c_->q());
        total.values += dense.values;
        if (k_top_ == 0) {
            accumulate(rho_, dense);
            continue;
        }
        const int p = pivot_vertex(t, term.support, rho_, K_);
        const int kp = relative_height(p);
        if (kp <= 0) {
            accumulate(t.ancestor(p, h_probe_ - t.height(p)), dense);
        } else {
            // Any V_1 vertex below the pivot admits the term; take the leftmost.
            int v = p;
            while (relative_height(v) > 1) v = t.children(v).front();
            accumulate(v, dense);
        }
    }

    for (int layer = 0; layer < k_top_; ++layer) {
        for (int v : layers_[layer]) {
            auto it = phi.find(v);
            if (it == phi.end()) continue;
            std::vector<const Projection*> steps;
            for (int j = 0; j <= k_top_ - layer; ++j) steps.push_back(proj_.at(t.ancestor(v, j)).get());
            DenseFunction fv = r_chain_apply(steps, it->second);
            DenseFunction pushed = subtract(it->second, fv);
            r.components.at(v) = std::move(fv);
            accumulate(t.parent(v), pushed);
        }
    }
    if (auto it = phi.find(rho_); it != phi.end()) r.components.at(rho_) = it->second;

    DenseFunction sum = DenseFunction::zero(leaves_, c_->q());
    for (const auto& [v, fv] : r.components) sum.values += fv.values;
    r.residual = max_norm(subtract(sum, total));

    if (check_membership) {
        for (const auto& [v, fv] : r.components) {
            double res = 0.0;
            if (v == rho_) {
                res = tensor_residual(fv, top_factors_) / std::max(1.0, max_norm(fv));
            } else {
                res = member_.at(v)->residual(fv);
            }
            r.membership[v] = res;
        }
    }
    return r;
}

DecompositionResult decompose_f(const RootedTree& t, const TransitionChain& c, int rho_prime, int K,
                                const EsPolynomial& f, int h_probe) {
    return Decomposer(t, c, rho_prime, K, h_probe).decompose(f);
}

PairwiseReport pairwise_report(const RootedTree& t, const TransitionChain& c, const DecompositionResult& f,
                               const DecompositionResult* g) {
    const DecompositionResult& other = g ? *g : f;
    if (other.base_vertex != f.base_vertex) throw Error(Errc::DomainMismatch, "decompositions use different base vertices");
    PairwiseReport rep;
    for (const auto& [v, fv] : f.components) rep.vertices.push_back(v);
    const int n = static_cast<int>(rep.vertices.size());
    const int rho = f.base_vertex;
    const Domain leaves = t.leaves_below(rho);
    const Eigen::MatrixXd k = conditional_kernel(t, c, rho, leaves);
    const Eigen::RowVectorXd law = c.pi().transpose() * k;
    rep.e_table = Eigen::MatrixXd::Zero(n, n);
    rep.d_table = Eigen::MatrixXd::Zero(n, n);
    rep.u_norms = Eigen::MatrixXd::Zero(n, 2);
    rep.meta.assign(n, std::vector<PairMeta>(n));
    for (int i = 0; i < n; ++i) {
        const auto& fi = f.components.at(rep.vertices[i]).values;
        const auto& gi = other.components.at(rep.vertices[i]).values;
        rep.u_norms(i, 0) = std::sqrt(std::max(0.0, law.dot(fi.cwiseProduct(fi))));
        rep.u_norms(i, 1) = std::sqrt(std::max(0.0, law.dot(gi.cwiseProduct(gi))));
    }
    double slack = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const auto& fi = f.components.at(rep.vertices[i]).values;
        for (int j = 0; j < n; ++j) {
            const auto& gj = other.components.at(rep.vertices[j]).values;
            const Eigen::VectorXd prod = fi.cwiseProduct(gj);
            const Eigen::VectorXd cond = k * prod;
            const double e = law.dot(prod);
            rep.e_table(i, j) = std::abs(e);
            rep.d_table(i, j) = (cond.array() - e).abs().maxCoeff();
            slack = std::max(slack, std::abs(e) - rep.u_norms(i, 0) * rep.u_norms(j, 1));
            const int u = rep.vertices[i], v = rep.vertices[j];
            const int w = nearest_common_ancestor(t, u, v);
            rep.meta[i][j] = PairMeta{f.layer_index.at(u), f.layer_index.at(v), t.height(w) - f.h_probe};
        }
    }
    rep.cauchy_schwarz_slack = n ? slack : 0.0;
    return rep;
}

}  // namespace botlab
