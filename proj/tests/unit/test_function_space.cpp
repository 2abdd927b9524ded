#include "doctest.h"

#include "botlab/error.hpp"
#include "botlab/function_space.hpp"
#include "botlab/chain.hpp"
#include "botlab/projections.hpp"

#include <random>

using namespace botlab;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// Every indicator 1[x_S = s] for |S| <= k, in the order (size, subset, states).
Eigen::MatrixXd all_lifts(int nvars, int q, int k) {
    std::vector<Eigen::VectorXd> cols;
    const int total = 1 << nvars;
    std::size_t states = 1;
    for (int i = 0; i < nvars; ++i) states *= q;
    for (int size = 0; size <= std::min(k, nvars); ++size) {
        std::vector<std::vector<int>> subsets;
        for (int mask = 0; mask < total; ++mask)
            if (__builtin_popcount(mask) == size) {
                std::vector<int> s;
                for (int i = 0; i < nvars; ++i)
                    if (mask >> i & 1) s.push_back(i);
                subsets.push_back(s);
            }
        std::sort(subsets.begin(), subsets.end());
        for (const auto& s : subsets) {
            std::size_t combos = 1;
            for (std::size_t i = 0; i < s.size(); ++i) combos *= q;
            for (std::size_t a = 0; a < combos; ++a) {
                std::vector<int> want(s.size());
                std::size_t r = a;
                for (int i = static_cast<int>(s.size()) - 1; i >= 0; --i) {
                    want[i] = static_cast<int>(r % q);
                    r /= q;
                }
                Eigen::VectorXd col(static_cast<Eigen::Index>(states));
                for (std::size_t z = 0; z < states; ++z) {
                    std::vector<int> x(nvars);
                    std::size_t rr = z;
                    for (int i = nvars - 1; i >= 0; --i) {
                        x[i] = static_cast<int>(rr % q);
                        rr /= q;
                    }
                    bool hit = true;
                    for (std::size_t i = 0; i < s.size(); ++i) hit = hit && x[s[i]] == want[i];
                    col(static_cast<Eigen::Index>(z)) = hit ? 1.0 : 0.0;
                }
                cols.push_back(col);
            }
        }
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = cols[i];
    return m;
}

}  // namespace

TEST_CASE("es_degree") {
    EsPolynomial f;
    CHECK(es_degree(f) == 0);
    for (int v = 3; v < 7; ++v) f.terms.push_back({{v}, {1.0, 0.0}});
    CHECK(es_degree(f) == 1);
    EsPolynomial g;
    g.terms.push_back({{3, 4, 5}, std::vector<double>(8, 1.0)});
    CHECK(es_degree(g) == 3);
}

TEST_CASE("to_dense lifts") {
    CHECK(to_dense(LocalFunction{{}, {1.0}}, {3, 4}, 2).values == vec({1, 1, 1, 1}));
    CHECK(to_dense(LocalFunction{{3}, {1.0, -1.0}}, {3, 4}, 2).values == vec({1, 1, -1, -1}));
    EsPolynomial f;
    f.terms.push_back({{3}, {0.25, -1.5}});
    f.terms.push_back({{4}, {2.0, 0.5}});
    const DenseFunction sum = add(to_dense(f.terms[0], {3, 4}, 2), to_dense(f.terms[1], {3, 4}, 2));
    CHECK((to_dense(f, {3, 4}).values - sum.values).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK_THROWS_AS(to_dense(LocalFunction{{5}, {1.0, 2.0}}, {3, 4}, 2), Error);
    CHECK_THROWS_AS(to_dense(LocalFunction{{3}, {1.0, 2.0, 3.0}}, {3, 4}, 2), Error);
}

TEST_CASE("tensor_identify") {
    const DenseFunction one = DenseFunction::constant({}, 2, 1.0);
    const DenseFunction f(Domain{5}, 2, vec({0.3, -2.0}));
    CHECK(tensor_identify({one, f}).values == f.values);
    const DenseFunction a(Domain{3}, 2, vec({1, -1})), b(Domain{4}, 2, vec({1, -1}));
    const DenseFunction ab = tensor_identify({a, b});
    CHECK(ab.domain == Domain{3, 4});
    CHECK(ab.values == vec({1, -1, -1, 1}));
    // order of the parts does not change the identified function
    CHECK(tensor_identify({b, a}).values == ab.values);
    try {
        tensor_identify({a, a});
        FAIL("expected OverlappingDomains");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::OverlappingDomains);
    }
}

TEST_CASE("lift, restrict_sum and slice") {
    const DenseFunction f(Domain{2}, 3, vec({1, 2, 3}));
    const DenseFunction l = lift(f, {1, 2});
    CHECK(l.values == vec({1, 2, 3, 1, 2, 3, 1, 2, 3}));
    CHECK(restrict_sum(l, {2}).values == vec({3, 6, 9}));
    CHECK(slice(l, 1, 2).values == vec({1, 2, 3}));
}

TEST_CASE("greedy reduction of all indicator lifts equals indicator_basis") {
    for (int q = 2; q <= 3; ++q)
        for (int n = 1; n <= 3; ++n)
            for (int k = 0; k <= n; ++k) {
                Domain vars;
                for (int i = 0; i < n; ++i) vars.push_back(10 + i);
                SubspaceBasis spanning;
                spanning.domain = vars;
                spanning.q = q;
                spanning.vectors = all_lifts(n, q, k);
                const SubspaceBasis g = greedy_reduce(spanning);
                const SubspaceBasis b = indicator_basis(vars, q, k);
                REQUIRE(g.dim() == b.dim());
                CHECK((g.vectors - b.vectors).cwiseAbs().maxCoeff() == 0.0);
                Eigen::FullPivLU<Eigen::MatrixXd> lu(spanning.vectors);
                CHECK(lu.rank() == b.dim());
            }
}

TEST_CASE("tk_basis dimensions") {
    const TransitionChain c = bsc(0.3);
    const RootedTree t = build_dary(2, 1);
    CHECK(tk_basis(t, c, 1, 0).dim() == 2);
    CHECK(tk_basis(t, c, 0, 0).dim() == 3);
    CHECK(tk_basis(t, c, 0, 1).dim() == 4);
    // the 5 lifts of degree <= 1 over two binary leaves have rank 3
    Eigen::FullPivLU<Eigen::MatrixXd> lu(all_lifts(2, 2, 1));
    CHECK(lu.rank() == 3);
    CHECK(tk_basis(t, c, 0, 0).gram_rank == 3);
}

TEST_CASE("orthonormalize and span residual") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    SubspaceBasis b;
    b.domain = {0, 1, 2};
    b.q = 2;
    b.vectors.resize(8, 4);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 3; ++j) b.vectors(i, j) = nd(rng);
    b.vectors.col(3) = b.vectors.col(0) - 2.0 * b.vectors.col(2);
    const SubspaceBasis o = orthonormalize(b);
    CHECK(o.dim() == 3);
    CHECK((o.vectors.transpose() * o.vectors - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(span_residual(DenseFunction(b.domain, 2, b.vectors.col(3)), o) < 1e-12);
    Eigen::VectorXd off = Eigen::VectorXd::Zero(8);
    for (int i = 0; i < 8; ++i) off(i) = nd(rng);
    const Eigen::VectorXd proj = o.vectors * (o.vectors.transpose() * off);
    CHECK(span_residual(DenseFunction(b.domain, 2, off), o) ==
          doctest::Approx((off - proj).cwiseAbs().maxCoeff()).epsilon(1e-12));
}

TEST_CASE("tensor_residual vanishes on product functions") {
    const SubspaceBasis a = orthonormalize(indicator_basis({0}, 2, 0));  // constants on x0
    const SubspaceBasis b = orthonormalize(indicator_basis({1, 2}, 2, 1));
    const DenseFunction g(Domain{1, 2}, 2, vec({1, 0.5, -2, -2.5}));
    const DenseFunction prod = tensor_identify({DenseFunction::constant({0}, 2, 3.0), g});
    CHECK(tensor_residual(prod, {a, b}) < 1e-12);
    const DenseFunction bad(Domain{0, 1, 2}, 2, vec({1, 0, 0, 0, 0, 0, 0, 0}));
    CHECK(tensor_residual(bad, {a, b}) > 0.1);
}

TEST_CASE("orthonormalize keeps a clustered spectrum accurate") {
    // Under a symmetric chain (I - Π)W has 16 equal singular values and 9 zeros.
    const RootedTree t = build_dary(2, 4);
    const TransitionChain c = bsc(0.3);
    const SubspaceBasis w = tt_basis(t, 2, t.children(1), 0);
    const SubspaceBasis x = r_space_basis(t, c, 1, w, 0, 0);
    CHECK(x.dim() == 16);
    const Projection p(t, c, 1, 0);
    const DenseFunction phi = to_dense(LocalFunction{{15, 22}, {0.3, -1.2, 0.7, 2.0}}, t.leaves_below(1), 2);
    CHECK(span_residual(subtract(phi, p.apply(phi)), x) < 1e-12);
}
