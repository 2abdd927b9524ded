#pragma once

// Brute-force reference computations.  Everything here works from a raw parent
// array and a raw transition matrix, never through the library's message
// passing, kernels or projections.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

struct RawTree {
    std::vector<int> parent;  // parent[0] = -1, parent[i] < i
    int n() const { return static_cast<int>(parent.size()); }
    std::vector<int> leaves() const {
        std::vector<int> has_child(parent.size(), 0), out;
        for (std::size_t i = 1; i < parent.size(); ++i) has_child[parent[i]] = 1;
        for (std::size_t i = 0; i < parent.size(); ++i)
            if (!has_child[i]) out.push_back(static_cast<int>(i));
        return out;
    }
};

inline RawTree complete_tree(int d, int depth) {
    RawTree t;
    t.parent.push_back(-1);
    int lo = 0, hi = 1;
    for (int l = 0; l < depth; ++l) {
        for (int v = lo; v < hi; ++v)
            for (int k = 0; k < d; ++k) t.parent.push_back(v);
        lo = hi;
        hi = static_cast<int>(t.parent.size());
    }
    return t;
}

// Stationary law by repeated squaring of M (rows converge to π).
inline Eigen::VectorXd stationary(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd p = m;
    for (int i = 0; i < 60; ++i) {
        p = p * p;
        for (int r = 0; r < p.rows(); ++r) p.row(r) /= p.row(r).sum();
    }
    Eigen::VectorXd pi = p.row(0).transpose();
    return pi / pi.sum();
}

// Calls visit(labeling, probability) for every labeling of the tree.
inline void enumerate(const RawTree& t, const Eigen::MatrixXd& m, const Eigen::VectorXd& root_law,
                      const std::function<void(const std::vector<int>&, double)>& visit) {
    const int n = t.n(), q = static_cast<int>(m.rows());
    std::vector<int> x(n, 0);
    std::vector<double> w(n, 0.0);
    std::function<void(int)> rec = [&](int v) {
        if (v == n) {
            visit(x, w[n - 1]);
            return;
        }
        for (int s = 0; s < q; ++s) {
            x[v] = s;
            w[v] = v == 0 ? root_law(s) : w[v - 1] * m(x[t.parent[v]], s);
            if (w[v] == 0.0 && v + 1 < n) continue;
            rec(v + 1);
        }
    };
    rec(0);
}

// E[g | X_root] and moments of g(X) by enumeration.
struct Moments {
    double mean = 0.0, variance = 0.0, root_variance = 0.0;
};

inline Moments moments(const RawTree& t, const Eigen::MatrixXd& m, const std::function<double(const std::vector<int>&)>& g) {
    const int q = static_cast<int>(m.rows());
    const Eigen::VectorXd pi = stationary(m);
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(q), first = Eigen::VectorXd::Zero(q);
    double s1 = 0.0, s2 = 0.0;
    enumerate(t, m, pi, [&](const std::vector<int>& x, double p) {
        const double v = g(x);
        mass(x[0]) += p;
        first(x[0]) += p * v;
        s1 += p * v;
        s2 += p * v * v;
    });
    Moments out;
    out.mean = s1;
    out.variance = s2 - s1 * s1;
    for (int r = 0; r < q; ++r) {
        if (mass(r) <= 0.0) continue;
        const double c = first(r) / mass(r) - s1;
        out.root_variance += mass(r) * c * c;
    }
    return out;
}

// Ergodic chain with rows drawn uniformly from the simplex; with zero_prob > 0
// some entries are zeroed (rows keep at least one positive entry).
inline Eigen::MatrixXd random_rows(std::mt19937_64& rng, int q, double zero_prob) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd m(q, q);
    for (int i = 0; i < q; ++i) {
        double s = 0.0;
        for (int j = 0; j < q; ++j) {
            m(i, j) = -std::log(1.0 - u(rng));
            if (u(rng) < zero_prob) m(i, j) = 0.0;
            s += m(i, j);
        }
        if (s == 0.0) {
            m(i, i) = 1.0;
            s = 1.0;
        }
        m.row(i) /= s;
    }
    return m;
}

}  // namespace oracle
