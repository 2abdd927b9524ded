#include "doctest.h"

#include "../oracles.hpp"
#include "botlab/broadcast.hpp"
#include "botlab/error.hpp"

#include <cmath>
#include <map>

using namespace botlab;

namespace {

oracle::RawTree raw(const RootedTree& t) {
    oracle::RawTree r;
    for (int v = 0; v < t.n(); ++v) r.parent.push_back(t.parent(v));
    return r;
}

}  // namespace

TEST_CASE("sample_labeling is deterministic per seed and index") {
    const RootedTree t = build_dary(3, 3);
    const TransitionChain c = bsc(0.2);
    const Labeling a = sample_labeling(t, c, RootInit{}, 42, 7);
    const Labeling b = sample_labeling(t, c, RootInit{}, 42, 7);
    CHECK(a.state == b.state);
    const Labeling other = sample_labeling(t, c, RootInit{}, 42, 8);
    CHECK(a.state != other.state);
    for (int v = 0; v < t.n(); ++v) CHECK(a.has(v));
}

TEST_CASE("stationary root frequencies follow pi") {
    Eigen::MatrixXd m(3, 3);
    m << 0.5, 0.3, 0.2, 0.1, 0.6, 0.3, 0.25, 0.25, 0.5;
    const TransitionChain c = validate_chain(m);
    const Eigen::VectorXd pi = oracle::stationary(m);
    const RootedTree t = build_dary(1, 0);
    const int n = 100000;
    std::vector<int> count(3, 0);
    for (int s = 0; s < n; ++s) ++count[sample_labeling(t, c, RootInit{}, static_cast<std::uint64_t>(s)).state[0]];
    double chi2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double e = n * pi(i);
        chi2 += (count[i] - e) * (count[i] - e) / e;
    }
    // 0.999 quantile of chi-square with 2 degrees of freedom
    CHECK(chi2 < 13.816);
}

TEST_CASE("clamped root, one edge: child frequency matches M00") {
    const RootedTree t = build_dary(1, 1);
    const TransitionChain c = bsc(0.3);
    const int n = 100000;
    int zeros = 0;
    for (int i = 0; i < n; ++i) zeros += sample_labeling(t, c, RootInit::fixed(0), 99, i).state[1] == 0;
    const double sigma = std::sqrt(n * 0.7 * 0.3);
    CHECK(std::abs(zeros - 0.7 * n) <= 3.0 * sigma);
}

TEST_CASE("joint_probability") {
    const TransitionChain c = bsc(0.3);
    const RootedTree t = build_dary(2, 1);
    Labeling x(3);
    x.state = {0, 0, 0};
    CHECK(joint_probability(t, c, x, RootInit{}) == doctest::Approx(0.245).epsilon(1e-14));
    CHECK(joint_probability(t, c, x, RootInit::fixed(0)) == doctest::Approx(0.49).epsilon(1e-14));
    Labeling r(1);
    r.state = {1};
    CHECK(joint_probability(build_dary(1, 0), c, r, RootInit{}) == doctest::Approx(0.5).epsilon(1e-14));
    Labeling partial(3);
    partial.state = {0, -1, 0};
    CHECK_THROWS_AS(joint_probability(t, c, partial, RootInit{}), Error);
}

TEST_CASE("joint_probability sums to one and matches enumeration") {
    std::mt19937_64 rng(1);
    const RootedTree t = build_dary(2, 2);
    const Eigen::MatrixXd m = oracle::random_rows(rng, 3, 0.0);
    const TransitionChain c = validate_chain(m);
    double total = 0.0, worst = 0.0;
    oracle::enumerate(raw(t), m, oracle::stationary(m), [&](const std::vector<int>& x, double p) {
        Labeling l(t.n());
        l.state = x;
        const double got = joint_probability(t, c, l, RootInit{});
        worst = std::max(worst, std::abs(got - p));
        total += got;
    });
    CHECK(worst < 1e-15);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("steiner_marginal examples") {
    const TransitionChain c = bsc(0.3);
    const RootedTree t2 = build_dary(2, 2);
    const DenseFunction leaf = steiner_marginal(t2, c, {3}, std::make_pair(0, 0));
    CHECK(leaf.values(0) == doctest::Approx(0.58).epsilon(1e-14));

    const DenseFunction sib = steiner_marginal(t2, c, {3, 4}, std::make_pair(1, 0));
    CHECK(sib.values(0) == doctest::Approx(0.49).epsilon(1e-14));
}

TEST_CASE("steiner_marginal against enumeration on random targets") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        const int q = 2 + trial % 2;
        const RootedTree t = trial % 3 == 0 ? build_dary(2, 1) : build_dary(2, 3);
        const Eigen::MatrixXd m = oracle::random_rows(rng, q, trial % 4 == 1 ? 0.25 : 0.0);
        TransitionChain c;
        try {
            c = validate_chain(m);
        } catch (const Error&) {
            continue;
        }
        Domain targets;
        for (int v = 0; v < t.n(); ++v)
            if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.35) targets.push_back(v);
        if (targets.empty()) targets = t.leaves();
        if (trial % 3 == 0) targets = t.leaves();
        const bool conditioned = trial % 2 == 1;
        const int cv = static_cast<int>(rng() % t.n()), cs = static_cast<int>(rng() % q);

        std::map<std::vector<int>, double> table;
        double cond_mass = 0.0;
        oracle::enumerate(raw(t), m, oracle::stationary(m), [&](const std::vector<int>& x, double p) {
            if (conditioned && x[cv] != cs) return;
            cond_mass += p;
            std::vector<int> key;
            for (int v : targets) key.push_back(x[v]);
            table[key] += p;
        });
        if (cond_mass <= 0.0) continue;
        const DenseFunction law = conditioned ? steiner_marginal(t, c, targets, std::make_pair(cv, cs))
                                              : steiner_marginal(t, c, targets);
        REQUIRE(law.domain == targets);
        double worst = 0.0;
        std::vector<int> st(targets.size(), 0);
        for (std::size_t idx = 0; idx < law.size(); ++idx) {
            std::size_t r = idx;
            for (int k = static_cast<int>(targets.size()) - 1; k >= 0; --k) {
                st[k] = static_cast<int>(r % q);
                r /= q;
            }
            const auto it = table.find(st);
            const double want = it == table.end() ? 0.0 : it->second / cond_mass;
            worst = std::max(worst, std::abs(law.values(idx) - want));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("conditional_kernel rows are laws") {
    const RootedTree t = build_dary(2, 2);
    const TransitionChain c = bsc(0.2);
    const Eigen::MatrixXd k = conditional_kernel(t, c, 1, {3, 4});
    CHECK(k.rows() == 2);
    CHECK(k.cols() == 4);
    for (int r = 0; r < 2; ++r) CHECK(k.row(r).sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(k(0, 0) == doctest::Approx(0.64).epsilon(1e-14));
}
