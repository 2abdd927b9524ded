#include "botlab/broadcast.hpp"

#include "botlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace botlab {

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int draw_state(std::mt19937_64& rng, const double* probs, int q) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (int s = 0; s < q - 1; ++s) {
        acc += probs[s];
        if (u < acc) return s;
    }
    return q - 1;
}

Labeling sample_labeling(const RootedTree& t, const TransitionChain& c, RootInit init, std::uint64_t seed,
                         std::uint64_t index) {
    const int q = c.q();
    auto rng = derived_rng(seed, index);
    Labeling x(t.n());
    const Eigen::MatrixXd rowsT = c.rows().transpose();  // column j = row j of M, contiguous
    if (init.stationary) {
        x.state[0] = draw_state(rng, c.pi().data(), q);
    } else {
        if (init.state < 0 || init.state >= q) throw Error(Errc::InvalidArgument, "root state out of range");
        x.state[0] = init.state;
    }
    for (int v = 1; v < t.n(); ++v) x.state[v] = draw_state(rng, rowsT.col(x.state[t.parent(v)]).data(), q);
    return x;
}

double joint_probability(const RootedTree& t, const TransitionChain& c, const Labeling& x, RootInit init) {
    if (static_cast<int>(x.state.size()) != t.n()) throw Error(Errc::IncompleteLabeling, "labeling size differs from the tree");
    for (int v = 0; v < t.n(); ++v)
        if (x.state[v] < 0 || x.state[v] >= c.q()) throw Error(Errc::IncompleteLabeling, "vertex " + std::to_string(v) + " unlabeled");
    const bool use_log = t.depth() > 30;
    double p = init.stationary ? c.pi()(x.state[0]) : (x.state[0] == init.state ? 1.0 : 0.0);
    if (!use_log) {
        for (int v = 1; v < t.n(); ++v) p *= c.at(x.state[t.parent(v)], x.state[v]);
        return p;
    }
    double lp = std::log(p);
    for (int v = 1; v < t.n(); ++v) lp += std::log(c.at(x.state[t.parent(v)], x.state[v]));
    return std::exp(lp);
}

namespace {

struct KernelBuilder {
    const RootedTree& t;
    const TransitionChain& c;
    Domain targets;  // sorted
    std::vector<int> marked;  // sorted: vertices with a target in their subtree

    bool is_marked(int v) const { return std::binary_search(marked.begin(), marked.end(), v); }
    bool is_target(int v) const { return std::binary_search(targets.begin(), targets.end(), v); }

    // Returns P(Y_{U in T_v} | Y_v), columns in `vars` order (first slowest).
    Eigen::MatrixXd block(int v, std::vector<int>& vars) const {
        const int q = c.q();
        int w = v, steps = 0;
        for (;;) {
            if (is_target(w)) break;
            int only = -1, count = 0;
            for (int ch : t.children(w))
                if (is_marked(ch)) {
                    only = ch;
                    ++count;
                }
            if (count != 1) break;
            w = only;
            ++steps;
        }
        Eigen::MatrixXd k;
        if (is_target(w)) {
            vars.push_back(w);
            k = Eigen::MatrixXd::Identity(q, q);
        } else {
            k = Eigen::MatrixXd::Ones(q, 1);
        }
        for (int ch : t.children(w)) {
            if (!is_marked(ch)) continue;
            std::vector<int> sub;
            Eigen::MatrixXd kc = c.rows() * block(ch, sub);
            Eigen::MatrixXd next(q, k.cols() * kc.cols());
            for (Eigen::Index a = 0; a < k.cols(); ++a)
                for (Eigen::Index b = 0; b < kc.cols(); ++b) next.col(a * kc.cols() + b) = k.col(a).cwiseProduct(kc.col(b));
            k.swap(next);
            vars.insert(vars.end(), sub.begin(), sub.end());
        }
        if (steps > 0) k = c.power(steps) * k;
        return k;
    }
};

}  // namespace

Eigen::MatrixXd conditional_kernel(const RootedTree& t, const TransitionChain& c, int u, const Domain& U) {
    if (!std::is_sorted(U.begin(), U.end()) || std::adjacent_find(U.begin(), U.end()) != U.end())
        throw Error(Errc::DomainMismatch, "kernel domain must be strictly ascending");
    const std::size_t cols = checked_states(c.q(), U.size(), "conditional kernel");
    KernelBuilder kb{t, c, U, {}};
    for (int v : U) {
        if (v < 0 || v >= t.n() || !t.is_below(v, u)) throw Error(Errc::DomainMismatch, "kernel variable outside the subtree");
        for (int w = v;; w = t.parent(w)) {
            kb.marked.push_back(w);
            if (w == u) break;
        }
    }
    std::sort(kb.marked.begin(), kb.marked.end());
    kb.marked.erase(std::unique(kb.marked.begin(), kb.marked.end()), kb.marked.end());
    if (U.empty()) return Eigen::MatrixXd::Ones(c.q(), 1);
    std::vector<int> vars;
    Eigen::MatrixXd k = kb.block(u, vars);
    if (vars == U) return k;
    const auto perm = offsets(U, vars, c.q());
    Eigen::MatrixXd out(c.q(), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < perm.size(); ++i) out.col(static_cast<Eigen::Index>(perm[i])) = k.col(static_cast<Eigen::Index>(i));
    return out;
}

DenseFunction subtree_law(const RootedTree& t, const TransitionChain& c, int u, const Domain& U) {
    Eigen::VectorXd v = (c.pi().transpose() * conditional_kernel(t, c, u, U)).transpose();
    return DenseFunction(U, c.q(), std::move(v));
}

DenseFunction steiner_marginal(const RootedTree& t, const TransitionChain& c, const Domain& targets,
                               std::optional<std::pair<int, int>> condition) {
    Domain sorted = targets;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw Error(Errc::DomainMismatch, "duplicate target");
    for (int v : sorted)
        if (v < 0 || v >= t.n()) throw Error(Errc::DomainMismatch, "target out of range");
    Domain z = sorted;
    if (condition) {
        auto [cv, cs] = *condition;
        if (cv < 0 || cv >= t.n() || cs < 0 || cs >= c.q()) throw Error(Errc::InvalidArgument, "bad condition");
        z = domain_union(z, {cv});
    }
    checked_states(c.q(), z.size(), "Steiner marginal");
    if (z.empty()) return DenseFunction::constant({}, c.q(), 1.0);
    const int w = nearest_common_ancestor(t, z);
    DenseFunction law = subtree_law(t, c, w, z);
    if (!condition) return law;
    auto [cv, cs] = *condition;
    const auto off_c = offsets(z, {cv}, c.q());
    const auto off_r = offsets(z, domain_minus(z, {cv}), c.q());
    for (int s = 0; s < c.q(); ++s) {
        if (s == cs) continue;
        for (std::size_t r : off_r) law.values(static_cast<Eigen::Index>(off_c[s] + r)) = 0.0;
    }
    law.values /= c.pi()(cs);
    return sorted == z ? law : restrict_sum(law, sorted);
}

}  // namespace botlab
