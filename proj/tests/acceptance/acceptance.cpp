// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Every reference value is recomputed here by brute force or closed form.

#include "../oracles.hpp"
#include "botlab/decomposition.hpp"
#include "botlab/error.hpp"
#include "botlab/experiment.hpp"
#include "botlab/inference.hpp"
#include "botlab/probes.hpp"
#include "botlab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <sstream>
#include <random>
#include <string>
#include <tuple>

using namespace botlab;

namespace {

// Tolerances and budgets.
constexpr double kBpTv = 1e-12;
constexpr double kBpSeconds = 30.0;
constexpr int kBpChains = 50;
constexpr int kBpMaxVertices = 12;
constexpr int kBpExhaustiveObs = 200;
constexpr double kMomentTol = 1e-10;
constexpr double kMomentSeconds = 20.0;
constexpr int kMomentChains = 20;
constexpr double kDecayRel = 0.05;
constexpr double kDecaySeconds = 10.0;
constexpr double kAboveFloor = 0.1;
constexpr double kVerifySeconds = 60.0;
constexpr int kProbeRestarts = 10000;
constexpr double kProbeRel = 0.01;
constexpr double kRoundTripTol = 1e-9;
constexpr int kRoundTripPolys = 100;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---------------------------------------------------------------------------
// Unlabeled rooted trees with every leaf on the bottom layer.

struct Shape {
    int size = 1, height = 0;
    std::vector<int> kids;  // pool ids, nondecreasing
};

class ShapePool {
public:
    // Canonical shapes of the given size and height, built from nondecreasing
    // multisets of child shapes; each isomorphism class appears once.
    const std::vector<int>& shapes(int n, int h, int max_children) {
        const auto key = std::make_tuple(n, h, max_children);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        std::vector<int> out;
        if (h == 0) {
            if (n == 1) out.push_back(add(Shape{}));
        } else if (n > 1) {
            std::vector<int> cand;
            for (int m = 1; m < n; ++m)
                for (int id : shapes(m, h - 1, max_children)) cand.push_back(id);
            std::vector<int> cur;
            collect(cand, 0, n - 1, max_children, cur, h, out);
        }
        return memo_[key] = out;
    }

    std::vector<int> parents(int id) const {
        std::vector<int> par{-1};
        std::deque<std::pair<int, int>> queue{{id, 0}};
        while (!queue.empty()) {
            auto [s, v] = queue.front();
            queue.pop_front();
            for (int k : pool_[s].kids) {
                par.push_back(v);
                queue.emplace_back(k, static_cast<int>(par.size()) - 1);
            }
        }
        return par;
    }

private:
    int add(Shape s) {
        pool_.push_back(std::move(s));
        return static_cast<int>(pool_.size()) - 1;
    }

    void collect(const std::vector<int>& cand, std::size_t start, int remaining, int max_children, std::vector<int>& cur,
                 int h, std::vector<int>& out) {
        if (remaining == 0) {
            Shape s;
            s.kids = cur;
            s.height = h;
            s.size = 1;
            for (int k : cur) s.size += pool_[k].size;
            out.push_back(add(s));
            return;
        }
        if (static_cast<int>(cur.size()) == max_children) return;
        for (std::size_t i = start; i < cand.size(); ++i) {
            if (pool_[cand[i]].size > remaining) continue;
            cur.push_back(cand[i]);
            collect(cand, i, remaining - pool_[cand[i]].size, max_children, cur, h, out);
            cur.pop_back();
        }
    }

    std::vector<Shape> pool_;
    std::map<std::tuple<int, int, int>, std::vector<int>> memo_;
};

std::vector<std::vector<int>> layered_trees(int max_vertices, int max_depth, int max_children) {
    ShapePool pool;
    std::vector<std::vector<int>> out;
    for (int n = 1; n <= max_vertices; ++n)
        for (int h = 0; h < n && h <= max_depth; ++h)
            for (int id : pool.shapes(n, h, max_children)) out.push_back(pool.parents(id));
    return out;
}

TransitionChain random_ergodic(std::mt19937_64& rng, int q, double zero_prob, Eigen::MatrixXd& rows) {
    for (;;) {
        rows = oracle::random_rows(rng, q, zero_prob);
        try {
            return validate_chain(rows);
        } catch (const Error&) {
        }
    }
}

// ---------------------------------------------------------------------------
// 1. BP against brute-force posteriors.

// P(X_root = r, X_L = y) for every r by summing over the hidden vertices.
Eigen::VectorXd hidden_sum(const std::vector<int>& par, int n_hidden, const Eigen::MatrixXd& m, const Eigen::VectorXd& pi,
                           const std::vector<int>& leaf_state) {
    const int q = static_cast<int>(m.rows());
    const int n = static_cast<int>(par.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(q);
    if (n_hidden == 0) {  // single-vertex tree: the root is the observed leaf
        out(leaf_state[0]) = pi(leaf_state[0]);
        return out;
    }
    // leaf factor per hidden vertex and state
    std::vector<Eigen::VectorXd> lf(n_hidden, Eigen::VectorXd::Ones(q));
    for (int l = n_hidden; l < n; ++l)
        for (int s = 0; s < q; ++s) lf[par[l]](s) *= m(s, leaf_state[l - n_hidden]);
    std::vector<int> x(n_hidden, 0);
    std::vector<double> w(n_hidden, 0.0);
    int v = 0;
    x[0] = -1;
    while (v >= 0) {
        if (++x[v] == q) {
            --v;
            continue;
        }
        const double base = v == 0 ? pi(x[0]) : w[v - 1] * m(x[par[v]], x[v]);
        w[v] = base * lf[v](x[v]);
        if (v + 1 == n_hidden) {
            out(x[0]) += w[v];
        } else if (w[v] != 0.0) {
            ++v;
            x[v] = -1;
        }
    }
    return out;
}

void criterion_bp() {
    const auto t0 = Clock::now();
    const auto trees = layered_trees(kBpMaxVertices, kBpMaxVertices, kBpMaxVertices);
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    long cases = 0, zero_ok = 0, zero_bad = 0;
    for (int q = 2; q <= 3; ++q) {
        for (int k = 0; k < kBpChains; ++k) {
            Eigen::MatrixXd m;
            const TransitionChain c = random_ergodic(rng, q, k % 5 == 4 ? 0.3 : 0.0, m);
            const Eigen::VectorXd pi = oracle::stationary(m);
            for (const auto& par : trees) {
                const RootedTree t = tree_from_parents(par);
                const VertexSet leaves = t.leaves();
                const int nl = static_cast<int>(leaves.size());
                const int hidden = t.n() - nl;
                double total = 1.0;
                for (int i = 0; i < nl; ++i) total *= q;
                const bool exhaustive = total <= kBpExhaustiveObs;
                const long count = exhaustive ? static_cast<long>(total) : kBpExhaustiveObs;
                std::vector<int> y(nl, 0);
                for (long o = 0; o < count; ++o) {
                    if (exhaustive) {
                        long r = o;
                        for (int i = nl - 1; i >= 0; --i) {
                            y[i] = static_cast<int>(r % q);
                            r /= q;
                        }
                    } else {
                        for (int i = 0; i < nl; ++i) y[i] = static_cast<int>(rng() % q);
                    }
                    Labeling obs(t.n());
                    for (int i = 0; i < nl; ++i) obs.state[leaves[i]] = y[i];
                    const Eigen::VectorXd joint = hidden_sum(par, hidden, m, pi, y);
                    const double ev = joint.sum();
                    ++cases;
                    if (ev <= 0.0) {
                        try {
                            bp_posterior(t, c, obs);
                            ++zero_bad;
                        } catch (const Error& e) {
                            (e.code() == Errc::ZeroLikelihood ? zero_ok : zero_bad)++;
                        }
                        continue;
                    }
                    const RootPosterior post = bp_posterior(t, c, obs);
                    double tv = 0.0;
                    for (int s = 0; s < q; ++s) tv += std::abs(post.probs[s] - joint(s) / ev);
                    worst = std::max(worst, 0.5 * tv);
                }
            }
        }
    }
    const double secs = seconds_since(t0);
    const bool ok = worst <= kBpTv && zero_bad == 0 && secs <= kBpSeconds;
    report(1, "bp_exactness", ok,
           fmt("%zu trees (<= %d vertices), q in {2,3}, %d chains each, %ld observations, max TV %.3g (tol %.0e), "
               "%ld impossible observations rejected, %ld mishandled, %.2f s (limit %.0f s)",
               trees.size(), kBpMaxVertices, kBpChains, cases, worst, kBpTv, zero_ok, zero_bad, secs, kBpSeconds));
}

// ---------------------------------------------------------------------------
// 2. var_ratio against enumeration.

void criterion_moments() {
    const auto t0 = Clock::now();
    const auto trees = layered_trees(15, 3, 2);
    std::mt19937_64 rng(77);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    long cases = 0;
    for (int k = 0; k < kMomentChains; ++k) {
        Eigen::MatrixXd m;
        const TransitionChain c = random_ergodic(rng, 2, k % 4 == 3 ? 0.3 : 0.0, m);
        for (const auto& par : trees) {
            const RootedTree t = tree_from_parents(par);
            const VertexSet leaves = t.leaves();
            oracle::RawTree raw{par};
            for (int p = 0; p < 3; ++p) {
                EsPolynomial f;
                f.q = 2;
                if (p == 0) {  // one table per leaf
                    for (int v : leaves) f.terms.push_back({{v}, {nd(rng), nd(rng)}});
                } else {  // random supports of size up to 2 (p = 1) or up to |L| (p = 2)
                    const int max_size = p == 1 ? 2 : static_cast<int>(leaves.size());
                    for (int s = 0; s < 4; ++s) {
                        VertexSet sup;
                        for (int v : leaves)
                            if (rng() % 2) sup.push_back(v);
                        if (sup.empty()) sup.push_back(leaves[rng() % leaves.size()]);
                        if (static_cast<int>(sup.size()) > max_size) sup.resize(max_size);
                        LocalFunction phi{sup, {}};
                        for (std::size_t j = 0; j < (std::size_t{1} << sup.size()); ++j) phi.table.push_back(nd(rng));
                        f.terms.push_back(phi);
                    }
                }
                const oracle::Moments mo = oracle::moments(raw, m, [&](const std::vector<int>& x) {
                    double s = 0.0;
                    for (const auto& phi : f.terms) {
                        std::size_t idx = 0;
                        for (int v : phi.support) idx = idx * 2 + x[v];
                        s += phi.table[idx];
                    }
                    return s;
                });
                if (mo.variance <= 1e-12) continue;
                worst = std::max(worst, std::abs(var_ratio(t, c, f) - mo.root_variance / mo.variance));
                ++cases;
            }
        }
    }
    const double secs = seconds_since(t0);
    report(2, "moment_engine_exactness", worst <= kMomentTol && secs <= kMomentSeconds,
           fmt("%zu binary trees of depth <= 3, %d chains, %ld polynomials, max |diff| %.3g (tol %.0e), %.2f s (limit %.0f s)",
               trees.size(), kMomentChains, cases, worst, kMomentTol, secs, kMomentSeconds));
}

// ---------------------------------------------------------------------------
// 3 and 4. Census decay below and above the threshold.

double census_ratio_closed_form(int d, int depth, double lam) {
    const double n = std::pow(d, depth);
    double s = 1.0;
    for (int k = 1; k <= depth; ++k) s += (std::pow(d, k) - std::pow(d, k - 1)) * std::pow(lam, 2 * k);
    return n * std::pow(lam, 2 * depth) / s;
}

std::vector<double> census_curve(double delta, int max_depth) {
    const TransitionChain c = bsc(delta);
    std::vector<double> r;
    for (int l = 1; l <= max_depth; ++l) {
        const RootedTree t = build_dary(2, l);
        r.push_back(var_ratio(t, c, census_polynomial(t, c)));
    }
    return r;
}

void criterion_below_ks() {
    const auto t0 = Clock::now();
    const std::vector<double> r = census_curve(0.3, 10);
    const double secs = seconds_since(t0);
    double oracle_gap = 0.0, worst_rel = 0.0;
    for (int l = 1; l <= 10; ++l)
        oracle_gap = std::max(oracle_gap, std::abs(r[l - 1] / census_ratio_closed_form(2, l, 0.4) - 1.0));
    std::ostringstream ratios;
    for (int l = 5; l < 10; ++l) {
        const double s = r[l] / r[l - 1];
        worst_rel = std::max(worst_rel, std::abs(s / 0.32 - 1.0));
        ratios << (l > 5 ? " " : "") << fmt("%.4f", s);
    }
    report(3, "census_decay_below_ks", worst_rel <= kDecayRel && oracle_gap <= 1e-10 && secs <= kDecaySeconds,
           fmt("BSC(0.3) d=2: r(l+1)/r(l) for l=5..9 = [%s], max rel. dev. from 0.32 %.4f (tol %.2f); "
               "closed-form gap %.2g; %.3f s (limit %.0f s)",
               ratios.str().c_str(), worst_rel, kDecayRel, oracle_gap, secs, kDecaySeconds));
}

void criterion_above_ks() {
    const std::vector<double> r = census_curve(0.1, 10);
    double lo = 1.0, oracle_gap = 0.0;
    for (int l = 1; l <= 10; ++l) {
        lo = std::min(lo, r[l - 1]);
        oracle_gap = std::max(oracle_gap, std::abs(r[l - 1] / census_ratio_closed_form(2, l, 0.8) - 1.0));
    }
    report(4, "no_decay_above_ks", lo >= kAboveFloor && oracle_gap <= 1e-10,
           fmt("BSC(0.1) d=2: min var_ratio over l=1..10 is %.4f (floor %.1f); closed-form gap %.2g", lo, kAboveFloor,
               oracle_gap));
}

// ---------------------------------------------------------------------------
// 5. Threshold localization from the sweep CSV.

void criterion_ks_bracket() {
    std::vector<double> grid;
    for (int i = 1; i <= 9; ++i) grid.push_back(0.05 * i);
    const std::string csv = run_ks_sweep(grid, 2, 8);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    bool header_ok = line == kKsCsvHeader;
    std::vector<double> delta, growth, succ;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
        if (cells.size() != 6) {
            header_ok = false;
            break;
        }
        delta.push_back(std::stod(cells[0]));
        succ.push_back(std::stod(cells[4]));
        growth.push_back(std::stod(cells[5]));
    }
    const double target = (1.0 - 1.0 / std::sqrt(2.0)) / 2.0;
    int crossings = 0;
    double lo = 0, hi = 0;
    for (std::size_t i = 1; i < delta.size(); ++i)
        if ((growth[i - 1] - 1.0) * (growth[i] - 1.0) < 0.0) {
            ++crossings;
            lo = delta[i - 1];
            hi = delta[i];
        }
    const bool ok = header_ok && delta.size() == grid.size() && crossings == 1 && lo < target && target < hi &&
                    hi - lo <= 0.05 + 1e-12;
    const bool succ_below = std::all_of(succ.begin(), succ.end(), [](double s) { return s < 1.0; });
    report(5, "ks_threshold_bracket", ok,
           fmt("diag_growth crosses 1 once, between delta=%.2f and %.2f; analytic delta*=%.4f; "
               "succ_ratio below 1 on the whole grid: %s",
               lo, hi, target, succ_below ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// 6. Lemma suite.

void criterion_verify() {
    const auto t0 = Clock::now();
    const auto reports = run_verify_suite(0);
    const double secs = seconds_since(t0);
    std::ostringstream s;
    for (const auto& r : reports)
        s << (s.tellp() ? ", " : "") << r.check_name.substr(6) << (r.pass ? " ok" : " FAILED")
          << fmt(" (%ld, %.1e)", r.instances, r.max_residual);
    report(6, "lemma_suite", all_pass(reports) && reports.size() == 6 && secs <= kVerifySeconds,
           fmt("%s; %.2f s (limit %.0f s)", s.str().c_str(), secs, kVerifySeconds));
}

// ---------------------------------------------------------------------------
// 7. Decay probe against alternating maximization.

// max over x of sup a^T C_x b with a^T G a = b^T G b = 1, basis {1, 1[x_l = 0]}
// on the complete binary tree of height h, by random restarts.
double probe_brute_force(const Eigen::MatrixXd& m, int h, std::mt19937_64& rng, int restarts) {
    const oracle::RawTree tree = oracle::complete_tree(2, h);
    const std::vector<int> leaves = tree.leaves();
    const int nb = 1 + static_cast<int>(leaves.size());
    const int q = static_cast<int>(m.rows());
    const Eigen::VectorXd pi = oracle::stationary(m);
    std::vector<Eigen::MatrixXd> cond(q, Eigen::MatrixXd::Zero(nb, nb));
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(q);
    oracle::enumerate(tree, m, pi, [&](const std::vector<int>& x, double p) {
        Eigen::VectorXd b(nb);
        b(0) = 1.0;
        for (std::size_t i = 0; i < leaves.size(); ++i) b(1 + i) = x[leaves[i]] == 0 ? 1.0 : 0.0;
        cond[x[0]] += p * b * b.transpose();
        mass(x[0]) += p;
    });
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(nb, nb);
    for (int s = 0; s < q; ++s) g += cond[s];
    const Eigen::MatrixXd gi = g.inverse();
    std::normal_distribution<double> nd;
    double best = 0.0;
    for (int s = 0; s < q; ++s) {
        const Eigen::MatrixXd cx = cond[s] / mass(s) - g;
        for (int r = 0; r < restarts / q; ++r) {
            Eigen::VectorXd b(nb), a(nb);
            for (int i = 0; i < nb; ++i) b(i) = nd(rng);
            b /= std::sqrt(b.dot(g * b));
            for (int it = 0; it < 60; ++it) {
                a = gi * cx * b;
                const double na = std::sqrt(a.dot(g * a));
                if (na == 0.0) break;
                a /= na;
                b = gi * cx.transpose() * a;
                const double nb2 = std::sqrt(b.dot(g * b));
                if (nb2 == 0.0) break;
                b /= nb2;
            }
            best = std::max(best, std::abs(a.dot(cx * b)));
        }
    }
    return best;
}

void criterion_probe() {
    const RootedTree t = build_dary(2, 4);
    const TransitionChain c = bsc(0.3);
    const DecayProbeReport rep = decay_probe(t, c, 0, {1, 2, 3, 4});
    bool decreasing = rep.delta.size() == 4;
    for (std::size_t i = 1; i < rep.delta.size(); ++i) decreasing = decreasing && rep.delta[i] < rep.delta[i - 1];
    std::mt19937_64 rng(99);
    double worst = 0.0;
    std::ostringstream bf;
    for (int h = 1; h <= 2; ++h) {
        const double b = probe_brute_force(c.rows(), h, rng, kProbeRestarts);
        worst = std::max(worst, std::abs(rep.delta[h - 1] / b - 1.0));
        bf << (h > 1 ? " " : "") << fmt("%.4f", b);
    }
    const bool ok = decreasing && rep.fitted_rate < 0.0 && worst <= kProbeRel;
    report(7, "decay_probe_trend", ok,
           fmt("delta(1..4) = [%.4f %.4f %.4f %.4f], slope %.4f; brute force h=1,2: [%s], max rel. diff %.2g (tol %.2f)",
               rep.delta[0], rep.delta[1], rep.delta[2], rep.delta[3], rep.fitted_rate, bf.str().c_str(), worst,
               kProbeRel));
}

// ---------------------------------------------------------------------------
// 8. Decomposition round trip.

void criterion_round_trip() {
    const auto t0 = Clock::now();
    const RootedTree t = build_dary(2, 4);
    const Domain leaves = t.leaves();
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> nd;
    double worst_res = 0.0, worst_mem = 0.0;
    int done = 0;
    const int chains = 5;
    for (int k = 0; k < chains; ++k) {
        Eigen::MatrixXd m;
        const TransitionChain c = k == 0 ? bsc(0.3) : random_ergodic(rng, 2, 0.0, m);
        const Decomposer dec(t, c, t.root(), 0, 2);
        for (int p = 0; p < kRoundTripPolys / chains; ++p) {
            EsPolynomial f;
            f.q = 2;
            const int terms = 2 + static_cast<int>(rng() % 7);
            for (int s = 0; s < terms; ++s) {
                VertexSet sup{leaves[rng() % leaves.size()]};
                if (s == 0 || rng() % 2) {
                    int other = leaves[rng() % leaves.size()];
                    while (other == sup[0]) other = leaves[rng() % leaves.size()];
                    sup.push_back(other);
                    std::sort(sup.begin(), sup.end());
                }
                LocalFunction phi{sup, {}};
                for (std::size_t j = 0; j < (std::size_t{1} << sup.size()); ++j) phi.table.push_back(nd(rng));
                f.terms.push_back(phi);
            }
            const DecompositionResult r = dec.decompose(f);
            // Direct evaluation of f at every leaf assignment.
            Eigen::VectorXd sum = Eigen::VectorXd::Zero(1 << leaves.size());
            for (const auto& [u, fu] : r.components) sum += fu.values;
            double res = 0.0;
            for (int z = 0; z < (1 << leaves.size()); ++z) {
                double want = 0.0;
                for (const auto& phi : f.terms) {
                    std::size_t idx = 0;
                    for (int v : phi.support) idx = idx * 2 + ((z >> (static_cast<int>(leaves.size()) - 1 - (v - leaves[0]))) & 1);
                    want += phi.table[idx];
                }
                res = std::max(res, std::abs(sum(z) - want));
            }
            worst_res = std::max(worst_res, res);
            for (const auto& [u, mem] : r.membership) worst_mem = std::max(worst_mem, mem);
            ++done;
        }
    }
    const double secs = seconds_since(t0);
    report(8, "decomposition_round_trip", done == kRoundTripPolys && worst_res <= kRoundTripTol && worst_mem <= kRoundTripTol,
           fmt("%d degree-2 polynomials on binary depth 4 (K=0, %d chains): max residual %.3g, max membership %.3g "
               "(tol %.0e), %.2f s",
               done, chains, worst_res, worst_mem, kRoundTripTol, secs));
}

template <class F>
void guarded(int id, const char* name, F&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(id, name, false, std::string("exception: ") + e.what());
    }
}

}  // namespace

int main() {
    guarded(1, "bp_exactness", criterion_bp);
    guarded(2, "moment_engine_exactness", criterion_moments);
    guarded(3, "census_decay_below_ks", criterion_below_ks);
    guarded(4, "no_decay_above_ks", criterion_above_ks);
    guarded(5, "ks_threshold_bracket", criterion_ks_bracket);
    guarded(6, "lemma_suite", criterion_verify);
    guarded(7, "decay_probe_trend", criterion_probe);
    guarded(8, "decomposition_round_trip", criterion_round_trip);
    std::printf("%d of 8 criteria failed\n", failures);
    return failures ? 1 : 0;
}
