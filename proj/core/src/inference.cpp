#include "botlab/inference.hpp"

#include "botlab/error.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace botlab {

RootPosterior bp_posterior(const RootedTree& t, const TransitionChain& c, const Labeling& leaf_obs) {
    const int q = c.q();
    if (static_cast<int>(leaf_obs.state.size()) != t.n())
        throw Error(Errc::IncompleteObservation, "labeling size does not match tree");
    for (int v : t.leaves())
        if (!leaf_obs.has(v) || leaf_obs.state[v] >= q)
            throw Error(Errc::IncompleteObservation, "leaf " + std::to_string(v) + " unobserved");

    std::vector<Eigen::VectorXd> msg(static_cast<std::size_t>(t.n()));
    double log_norm = 0.0;
    for (int v = t.n() - 1; v >= 0; --v) {
        Eigen::VectorXd m;
        if (t.is_leaf(v)) {
            m = Eigen::VectorXd::Zero(q);
            m[leaf_obs.state[v]] = 1.0;
        } else {
            m = Eigen::VectorXd::Ones(q);
            for (int ch : t.children(v)) {
                m = m.cwiseProduct(c.rows() * msg[ch]);
                msg[ch].resize(0);
            }
            const double z = m.sum();
            if (!(z > 0.0)) throw Error(Errc::ZeroLikelihood, "observation has probability zero");
            m /= z;
            log_norm += std::log(z);
        }
        msg[v] = std::move(m);
    }
    Eigen::VectorXd post = c.pi().cwiseProduct(msg[0]);
    const double z = post.sum();
    if (!(z > 0.0)) throw Error(Errc::ZeroLikelihood, "observation has probability zero");
    post /= z;
    RootPosterior r;
    r.probs.assign(post.data(), post.data() + q);
    r.log_evidence = log_norm + std::log(z);
    return r;
}

int map_root(const RootPosterior& posterior) {
    int best = 0;
    for (int s = 1; s < static_cast<int>(posterior.probs.size()); ++s)
        if (posterior.probs[s] > posterior.probs[best]) best = s;
    return best;
}

std::vector<double> census_weight(const TransitionChain& c) {
    const int q = c.q();
    if (q < 2) throw Error(Errc::DegenerateSpectrum, "no second eigenvalue");
    const std::complex<double> mu = c.spectrum()[1];
    if (std::abs(mu) == 0.0 || c.lambda() == 0.0) throw Error(Errc::DegenerateSpectrum, "second eigenvalue is zero");
    if (std::abs(mu.imag()) > 1e-12 * std::max(1.0, std::abs(mu)))
        throw Error(Errc::ComplexEigenvector, "second eigenvalue is not real");

    Eigen::EigenSolver<Eigen::MatrixXd> es(c.rows());
    int idx = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < q; ++i) {
        const double dist = std::abs(es.eigenvalues()[i] - mu);
        if (dist < best) {
            best = dist;
            idx = i;
        }
    }
    Eigen::VectorXcd wc = es.eigenvectors().col(idx);
    // Rotate to a real vector: divide by the phase of the largest entry.
    Eigen::Index big = 0;
    wc.cwiseAbs().maxCoeff(&big);
    wc /= wc[big] / std::abs(wc[big]);
    Eigen::VectorXd w = wc.real();
    w.array() -= c.pi().dot(w);
    const double var = c.pi().dot(w.cwiseProduct(w));
    if (!(var > 0.0)) throw Error(Errc::DegenerateSpectrum, "eigenvector has zero variance under π");
    w /= std::sqrt(var);
    for (int i = 0; i < q; ++i) {
        if (std::abs(w[i]) > 1e-12) {
            if (w[i] < 0) w = -w;
            break;
        }
    }
    return {w.data(), w.data() + q};
}

double census_estimator(const RootedTree& t, const TransitionChain& c, const Labeling& leaf_obs) {
    const auto w = census_weight(c);
    double s = 0.0;
    for (int v : t.leaves()) {
        if (!leaf_obs.has(v) || leaf_obs.state[v] >= c.q())
            throw Error(Errc::IncompleteObservation, "leaf " + std::to_string(v) + " unobserved");
        s += w[leaf_obs.state[v]];
    }
    return s;
}

EsPolynomial census_polynomial(const RootedTree& t, const TransitionChain& c) {
    const auto w = census_weight(c);
    EsPolynomial f;
    f.q = c.q();
    for (int v : t.leaves()) f.terms.push_back(LocalFunction{{v}, w});
    return f;
}

McEstimate mc_correlation(const RootedTree& t, const TransitionChain& c, const LeafEstimator& estimator,
                          long trials, std::uint64_t seed) {
    if (trials < 1) throw Error(Errc::InvalidArgument, "trials must be >= 1");
    const auto w = census_weight(c);
    // Welford accumulators for the pair (estimator, w(X_root)).
    double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
    for (long i = 0; i < trials; ++i) {
        const Labeling x = sample_labeling(t, c, RootInit{}, seed, static_cast<std::uint64_t>(i));
        const double a = estimator(x), b = w[x.state[0]];
        const double n = static_cast<double>(i + 1);
        const double dx = a - mx, dy = b - my;
        mx += dx / n;
        my += dy / n;
        sxx += dx * (a - mx);
        syy += dy * (b - my);
        sxy += dx * (b - my);
    }
    McEstimate r;
    const double n = static_cast<double>(trials);
    if (trials < 2) {
        r.stderr_ = std::numeric_limits<double>::infinity();
        return r;
    }
    if (sxx <= 1e-300 * n || syy <= 1e-300 * n) {
        r.stderr_ = 1.0 / std::sqrt(n - 1.0);
        return r;
    }
    const double rho = sxy / std::sqrt(sxx * syy);
    r.mean = rho;
    r.stderr_ = (1.0 - rho * rho) / std::sqrt(n - 1.0);
    return r;
}

}  // namespace botlab
