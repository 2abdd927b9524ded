#include "botlab/chain.hpp"

#include "botlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace botlab {

namespace {

bool power_positive(const Eigen::MatrixXd& m) {
    const int q = static_cast<int>(m.rows());
    using Pattern = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
    Pattern base = (m.array() > 0.0).cast<int>();
    Pattern cur = base;
    const int bound = q * q - 2 * q + 2;
    for (int t = 1; t <= bound; ++t) {
        if ((cur.array() > 0).all()) return true;
        Pattern next = cur * base;
        cur = (next.array() > 0).cast<int>();
    }
    return false;
}

}  // namespace

Eigen::MatrixXd TransitionChain::power(int k) const {
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(q(), q());
    Eigen::MatrixXd base = rows_;
    while (k > 0) {
        if (k & 1) result = result * base;
        k >>= 1;
        if (k) base = base * base;
    }
    return result;
}

TransitionChain validate_chain(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() < 2)
        throw Error(Errc::InvalidArgument, "transition matrix must be square with q >= 2");
    const int q = static_cast<int>(m.rows());
    for (int i = 0; i < q; ++i) {
        double s = 0.0;
        for (int j = 0; j < q; ++j) {
            double v = m(i, j);
            if (!std::isfinite(v) || v < 0.0)
                throw Error(Errc::NonStochastic, "negative or non-finite entry");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-9) throw Error(Errc::NonStochastic, "row does not sum to 1");
    }
    if (!power_positive(m)) throw Error(Errc::NotErgodic, "no strictly positive power within the Wielandt bound");

    TransitionChain c;
    c.rows_ = m;
    c.ergodic_ = true;

    // Stationary law: (M^T - I) p = 0 with one equation replaced by Σ p = 1.
    Eigen::MatrixXd a = m.transpose() - Eigen::MatrixXd::Identity(q, q);
    a.row(q - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(q);
    rhs(q - 1) = 1.0;
    Eigen::VectorXd p = a.fullPivLu().solve(rhs);
    p = p.cwiseMax(0.0);
    p /= p.sum();
    // One refinement pass through power iteration keeps the residual at rounding level.
    for (int it = 0; it < 4; ++it) {
        Eigen::VectorXd next = m.transpose() * p;
        p = next / next.sum();
    }
    c.pi_ = p;

    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    std::vector<std::complex<double>> ev(q);
    for (int i = 0; i < q; ++i) ev[i] = es.eigenvalues()(i);
    std::size_t one = 0;
    for (std::size_t i = 1; i < ev.size(); ++i)
        if (std::abs(ev[i] - 1.0) < std::abs(ev[one] - 1.0)) one = i;
    std::swap(ev[0], ev[one]);
    std::stable_sort(ev.begin() + 1, ev.end(), [](auto x, auto y) {
        if (std::abs(x) != std::abs(y)) return std::abs(x) > std::abs(y);
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() > y.imag();
    });
    double lam = 0.0;
    for (std::size_t i = 1; i < ev.size(); ++i) lam = std::max(lam, std::abs(ev[i]));
    if (lam < 1e-12) lam = 0.0;
    c.lambda_ = lam;
    c.spectrum_ = std::move(ev);
    return c;
}

TransitionChain validate_chain(const std::vector<std::vector<double>>& rows) {
    const int q = static_cast<int>(rows.size());
    Eigen::MatrixXd m(q, q);
    for (int i = 0; i < q; ++i) {
        if (static_cast<int>(rows[i].size()) != q)
            throw Error(Errc::InvalidArgument, "transition matrix must be square");
        for (int j = 0; j < q; ++j) m(i, j) = rows[i][j];
    }
    return validate_chain(m);
}

TransitionChain bsc(double delta) {
    Eigen::MatrixXd m(2, 2);
    m << 1.0 - delta, delta, delta, 1.0 - delta;
    return validate_chain(m);
}

double ks_parameter(const TransitionChain& chain, int d) {
    return static_cast<double>(d) * chain.lambda() * chain.lambda();
}

double solve_two_branch(double t, int d) {
    return std::min(t, std::sqrt(t / static_cast<double>(d)));
}

DecayParameters decay_parameters(const TransitionChain& chain, int d, double R, double cr) {
    if (d < 1) throw Error(Errc::InvalidArgument, "arity must be >= 1");
    if (R < 1.0) throw Error(Errc::InvalidArgument, "R must be >= 1");
    const double lam = chain.lambda();
    const double ks = ks_parameter(chain, d);
    if (ks >= 1.0) throw Error(Errc::AboveThreshold, "d*lambda^2 >= 1");
    if (lam <= 0.0) throw Error(Errc::DegenerateSpectrum, "lambda = 0 leaves the rate unbounded");

    DecayParameters p;
    p.cr = cr;
    p.eps = -std::log(std::max(ks, lam)) / 2.4;
    p.lambda_eps = solve_two_branch(std::exp(-2.2 * p.eps), d);
    p.lambda_tilde_eps = solve_two_branch(std::exp(-2.3 * p.eps), d);
    p.kappa = std::pow(p.lambda_eps / p.lambda_tilde_eps, 1.0 / 6.0) - 1.0;
    const double base = cr * (std::log(R) + 1.0);
    const double extra = p.eps / (10.0 * d) * base;
    p.h_diamond = static_cast<long>(std::ceil(base + extra));
    p.m = static_cast<long>(std::floor(extra));
    return p;
}

double markov_decay_probe(const TransitionChain& chain, int k) {
    if (k < 0) throw Error(Errc::InvalidArgument, "k must be >= 0");
    const Eigen::MatrixXd mk = chain.power(k);
    const Eigen::VectorXd& pi = chain.pi();
    const int q = chain.q();
    // For each output row i: max c.f over the box |f_j| <= 1 with pi.f = 0.
    // LP duality gives min over mu of sum_j |c_j - mu pi_j|, attained at a breakpoint.
    double best = 0.0;
    for (int i = 0; i < q; ++i) {
        double row_best = std::numeric_limits<double>::infinity();
        for (int b = 0; b < q; ++b) {
            const double mu = mk(i, b) / pi(b);
            double s = 0.0;
            for (int j = 0; j < q; ++j) s += std::abs(mk(i, j) - mu * pi(j));
            row_best = std::min(row_best, s);
        }
        best = std::max(best, row_best);
    }
    return best;
}

}  // namespace botlab
