#include "botlab/probes.hpp"

#include "botlab/error.hpp"

#include <cmath>

namespace botlab {

DecayProbeReport decay_probe(const RootedTree& t, const TransitionChain& c, int K, const std::vector<int>& heights) {
    if (K < 0) throw Error(Errc::InvalidArgument, "K must be >= 0");
    DecayProbeReport rep;
    rep.K = K;
    for (int h : heights) {
        const int u = t.first_at_height(h);
        if (u < 0) throw Error(Errc::InvalidArgument, "no vertex at height " + std::to_string(h));
        const double d = bilinear_decay_constant(t, c, {u}, tk_basis(t, c, u, K));
        rep.heights.push_back(h);
        rep.delta.push_back(d);
        if (rep.h_K_empirical < 0 && d <= 1.0) rep.h_K_empirical = h;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < rep.heights.size(); ++i) {
        if (!(rep.delta[i] > 0.0)) continue;
        const double x = rep.heights[i], y = std::log(rep.delta[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++n;
    }
    const double den = n * sxx - sx * sx;
    rep.fitted_rate = (n >= 2 && den > 0) ? (n * sxy - sx * sy) / den : std::nan("");
    return rep;
}

namespace {

struct Term {
    VertexSet support;
    Eigen::VectorXd table;  // centred
};

}  // namespace

VarianceParts variance_parts(const RootedTree& t, const TransitionChain& c, const EsPolynomial& f) {
    if (f.q != c.q()) throw Error(Errc::DomainMismatch, "polynomial and chain disagree on q");
    const int q = c.q();
    const Eigen::VectorXd& pi = c.pi();
    std::vector<Term> terms;
    Eigen::VectorXd root_part = Eigen::VectorXd::Zero(q);
    for (const auto& phi : f.terms) {
        validate_local(phi, q);
        for (int v : phi.support)
            if (v < 0 || v >= t.n()) throw Error(Errc::InvalidArgument, "support vertex out of range");
        Eigen::VectorXd tab = Eigen::Map<const Eigen::VectorXd>(phi.table.data(), phi.table.size());
        if (phi.support.size() == 1) {
            // Centre first and step down one edge at a time; M^k has entries close to
            // pi and subtracting the mean afterwards loses the small signal.
            const double mean = pi.dot(tab);
            Eigen::VectorXd g = tab.array() - mean;
            for (int s = 0; s < t.layer(phi.support[0]); ++s) g = c.rows() * g;
            root_part += g;
            terms.push_back(Term{phi.support, tab.array() - mean});
            continue;
        }
        const Eigen::MatrixXd k = conditional_kernel(t, c, t.root(), phi.support);
        Eigen::VectorXd g = k * tab;
        const double mean = pi.dot(g);
        root_part += g.array().matrix() - Eigen::VectorXd::Constant(q, mean);
        terms.push_back(Term{phi.support, tab.array() - mean});
    }
    VarianceParts out;
    out.root_variance = pi.dot(root_part.cwiseProduct(root_part));

    // M^k powers for the singleton fast path.
    std::vector<Eigen::MatrixXd> pw{Eigen::MatrixXd::Identity(q, q)};
    for (int k = 1; k <= t.depth(); ++k) pw.push_back(pw.back() * c.rows());

    auto pair_expect = [&](const Term& a, const Term& b) -> double {
        if (a.support.size() == 1 && b.support.size() == 1) {
            const int x = a.support[0], y = b.support[0];
            if (x == y) return pi.dot(a.table.cwiseProduct(b.table));
            const int w = nearest_common_ancestor(t, x, y);
            const Eigen::VectorXd ga = pw[t.layer(x) - t.layer(w)] * a.table;
            const Eigen::VectorXd gb = pw[t.layer(y) - t.layer(w)] * b.table;
            return pi.dot(ga.cwiseProduct(gb));
        }
        const Domain z = domain_union(a.support, b.support);
        const DenseFunction law = steiner_marginal(t, c, z, std::nullopt);
        const auto oa = offsets(z, a.support, q);
        const auto ob = offsets(z, b.support, q);
        // offsets(z, sub) enumerates z-offsets of sub-assignments with the rest at 0;
        // the complement offsets complete each entry.
        const Domain ra = domain_minus(z, a.support);
        const auto rest = offsets(z, ra, q);
        const Domain rb = domain_minus(z, b.support);
        const auto restb = offsets(z, rb, q);
        Eigen::VectorXd fa(law.values.size()), fb(law.values.size());
        for (std::size_t i = 0; i < oa.size(); ++i)
            for (std::size_t j = 0; j < rest.size(); ++j) fa[oa[i] + rest[j]] = a.table[i];
        for (std::size_t i = 0; i < ob.size(); ++i)
            for (std::size_t j = 0; j < restb.size(); ++j) fb[ob[i] + restb[j]] = b.table[i];
        return law.values.dot(fa.cwiseProduct(fb));
    };

    double total = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const double dii = pair_expect(terms[i], terms[i]);
        diag += dii;
        total += dii;
        for (std::size_t j = i + 1; j < terms.size(); ++j) total += 2.0 * pair_expect(terms[i], terms[j]);
    }
    out.total_variance = total;
    out.diagonal = diag;
    return out;
}

double var_ratio(const RootedTree& t, const TransitionChain& c, const EsPolynomial& f) {
    const VarianceParts p = variance_parts(t, c, f);
    if (!(p.total_variance > 1e-13 * std::max(p.diagonal, 1e-300)) || p.total_variance <= 0.0)
        throw Error(Errc::ZeroVariance, "Var(f) is zero");
    return p.root_variance / p.total_variance;
}

}  // namespace botlab
