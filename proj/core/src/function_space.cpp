#include "botlab/function_space.hpp"

#include "botlab/broadcast.hpp"
#include "botlab/chain.hpp"
#include "botlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace botlab {

Domain domain_union(const Domain& a, const Domain& b) {
    Domain out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

Domain domain_minus(const Domain& a, const Domain& b) {
    Domain out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool domain_subset(const Domain& sub, const Domain& full) {
    return std::includes(full.begin(), full.end(), sub.begin(), sub.end());
}

bool domain_disjoint(const Domain& a, const Domain& b) {
    Domain out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out.empty();
}

std::size_t ipow(int q, std::size_t n) {
    std::size_t s = 1;
    for (std::size_t i = 0; i < n; ++i) s *= static_cast<std::size_t>(q);
    return s;
}

std::vector<std::size_t> offsets(const Domain& full, const Domain& sub, int q) {
    std::vector<std::size_t> stride(sub.size());
    const std::size_t n = full.size();
    for (std::size_t j = 0; j < sub.size(); ++j) {
        auto it = std::lower_bound(full.begin(), full.end(), sub[j]);
        if (it == full.end() || *it != sub[j]) throw Error(Errc::DomainMismatch, "variable not in domain");
        std::size_t pos = static_cast<std::size_t>(it - full.begin());
        stride[j] = ipow(q, n - 1 - pos);
    }
    const std::size_t count = ipow(q, sub.size());
    std::vector<std::size_t> out(count, 0);
    // Odometer over sub, last variable fastest.
    std::vector<int> digit(sub.size(), 0);
    std::size_t cur = 0;
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = cur;
        for (std::size_t j = sub.size(); j-- > 0;) {
            if (++digit[j] < q) {
                cur += stride[j];
                break;
            }
            cur -= stride[j] * static_cast<std::size_t>(q - 1);
            digit[j] = 0;
        }
    }
    return out;
}

DenseFunction::DenseFunction(Domain d, int q_, Eigen::VectorXd v) : domain(std::move(d)), q(q_), values(std::move(v)) {
    if (!std::is_sorted(domain.begin(), domain.end()) ||
        std::adjacent_find(domain.begin(), domain.end()) != domain.end())
        throw Error(Errc::DomainMismatch, "domain must be strictly ascending");
    if (static_cast<std::size_t>(values.size()) != ipow(q, domain.size()))
        throw Error(Errc::DomainMismatch, "table length does not match q^|domain|");
}

DenseFunction DenseFunction::constant(const Domain& d, int q, double c) {
    const std::size_t n = checked_states(q, d.size(), "dense function");
    return DenseFunction(d, q, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), c));
}

double DenseFunction::at(const std::vector<int>& states) const {
    std::size_t idx = 0;
    for (int s : states) idx = idx * static_cast<std::size_t>(q) + static_cast<std::size_t>(s);
    return values(static_cast<Eigen::Index>(idx));
}

int es_degree(const EsPolynomial& f) {
    std::size_t d = 0;
    for (const auto& t : f.terms) d = std::max(d, t.support.size());
    return static_cast<int>(d);
}

void validate_local(const LocalFunction& phi, int q) {
    if (!std::is_sorted(phi.support.begin(), phi.support.end()) ||
        std::adjacent_find(phi.support.begin(), phi.support.end()) != phi.support.end())
        throw Error(Errc::SupportMismatch, "term support must be strictly ascending");
    if (phi.table.size() != ipow(q, phi.support.size()))
        throw Error(Errc::SupportMismatch, "term table length does not match q^|support|");
}

DenseFunction to_dense(const LocalFunction& phi, const Domain& domain, int q) {
    validate_local(phi, q);
    if (!domain_subset(phi.support, domain)) throw Error(Errc::SupportMismatch, "term support outside the domain");
    Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(phi.table.data(), static_cast<Eigen::Index>(phi.table.size()));
    return lift(DenseFunction(phi.support, q, t), domain);
}

DenseFunction to_dense(const EsPolynomial& f, const Domain& domain) {
    DenseFunction out = DenseFunction::zero(domain, f.q);
    for (const auto& term : f.terms) {
        validate_local(term, f.q);
        if (!domain_subset(term.support, domain)) throw Error(Errc::SupportMismatch, "term support outside the domain");
        const auto off_s = offsets(domain, term.support, f.q);
        const auto off_r = offsets(domain, domain_minus(domain, term.support), f.q);
        for (std::size_t a = 0; a < off_s.size(); ++a) {
            const double v = term.table[a];
            if (v == 0.0) continue;
            for (std::size_t r : off_r) out.values(static_cast<Eigen::Index>(off_s[a] + r)) += v;
        }
    }
    return out;
}

DenseFunction tensor_identify(const std::vector<DenseFunction>& parts) {
    if (parts.empty()) return DenseFunction::constant({}, 2, 1.0);
    DenseFunction out = DenseFunction::constant({}, parts.front().q, 1.0);
    for (const auto& p : parts) {
        if (!domain_disjoint(out.domain, p.domain))
            throw Error(Errc::OverlappingDomains, "tensor identification needs disjoint domains");
        out = multiply(out, p);
    }
    return out;
}

DenseFunction lift(const DenseFunction& f, const Domain& superset) {
    if (!domain_subset(f.domain, superset)) throw Error(Errc::DomainMismatch, "lift target must contain the domain");
    if (f.domain == superset) return f;
    const std::size_t n = checked_states(f.q, superset.size(), "lifted function");
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    const auto off_f = offsets(superset, f.domain, f.q);
    const auto off_r = offsets(superset, domain_minus(superset, f.domain), f.q);
    for (std::size_t a = 0; a < off_f.size(); ++a) {
        const double x = f.values(static_cast<Eigen::Index>(a));
        for (std::size_t r : off_r) v(static_cast<Eigen::Index>(off_f[a] + r)) = x;
    }
    return DenseFunction(superset, f.q, std::move(v));
}

DenseFunction restrict_sum(const DenseFunction& f, const Domain& keep) {
    if (!domain_subset(keep, f.domain)) throw Error(Errc::DomainMismatch, "marginal domain must be a subset");
    const auto off_k = offsets(f.domain, keep, f.q);
    const auto off_r = offsets(f.domain, domain_minus(f.domain, keep), f.q);
    Eigen::VectorXd v(static_cast<Eigen::Index>(off_k.size()));
    for (std::size_t a = 0; a < off_k.size(); ++a) {
        double s = 0.0;
        for (std::size_t r : off_r) s += f.values(static_cast<Eigen::Index>(off_k[a] + r));
        v(static_cast<Eigen::Index>(a)) = s;
    }
    return DenseFunction(keep, f.q, std::move(v));
}

DenseFunction slice(const DenseFunction& f, int vertex, int state) {
    Domain rest = domain_minus(f.domain, {vertex});
    if (rest.size() == f.domain.size()) throw Error(Errc::DomainMismatch, "slice vertex not in domain");
    const auto off_v = offsets(f.domain, {vertex}, f.q);
    const auto off_r = offsets(f.domain, rest, f.q);
    Eigen::VectorXd v(static_cast<Eigen::Index>(off_r.size()));
    for (std::size_t r = 0; r < off_r.size(); ++r)
        v(static_cast<Eigen::Index>(r)) = f.values(static_cast<Eigen::Index>(off_v[state] + off_r[r]));
    return DenseFunction(rest, f.q, std::move(v));
}

namespace {

template <class Op>
DenseFunction combine(const DenseFunction& f, const DenseFunction& g, Op op) {
    if (f.q != g.q) throw Error(Errc::DomainMismatch, "state counts differ");
    if (f.domain == g.domain) return DenseFunction(f.domain, f.q, op(f.values.array(), g.values.array()).matrix());
    Domain u = domain_union(f.domain, g.domain);
    DenseFunction a = lift(f, u), b = lift(g, u);
    return DenseFunction(u, f.q, op(a.values.array(), b.values.array()).matrix());
}

}  // namespace

DenseFunction add(const DenseFunction& f, const DenseFunction& g) {
    return combine(f, g, [](const auto& x, const auto& y) { return (x + y).eval(); });
}

DenseFunction subtract(const DenseFunction& f, const DenseFunction& g) {
    return combine(f, g, [](const auto& x, const auto& y) { return (x - y).eval(); });
}

DenseFunction multiply(const DenseFunction& f, const DenseFunction& g) {
    return combine(f, g, [](const auto& x, const auto& y) { return (x * y).eval(); });
}

DenseFunction scale(const DenseFunction& f, double c) { return DenseFunction(f.domain, f.q, f.values * c); }

double max_norm(const DenseFunction& f) { return f.values.size() ? f.values.cwiseAbs().maxCoeff() : 0.0; }

double expect(const DenseFunction& law, const DenseFunction& f) {
    if (!domain_subset(f.domain, law.domain)) throw Error(Errc::DomainMismatch, "function domain outside the law");
    if (f.domain == law.domain) return law.values.dot(f.values);
    return restrict_sum(law, f.domain).values.dot(f.values);
}

DenseFunction apply_block(const DenseFunction& f, const Domain& in, const Domain& out, const BlockMap& op) {
    if (!domain_subset(in, f.domain)) throw Error(Errc::DomainMismatch, "operator input outside the function domain");
    const Domain rest = domain_minus(f.domain, in);
    if (!domain_disjoint(rest, out)) throw Error(Errc::DomainMismatch, "operator output collides with free variables");
    const Domain result_domain = domain_union(rest, out);
    checked_states(f.q, result_domain.size(), "block operator output");
    const auto off_in = offsets(f.domain, in, f.q);
    const auto off_rest = offsets(f.domain, rest, f.q);
    Eigen::MatrixXd gathered(off_in.size(), off_rest.size());
    for (std::size_t r = 0; r < off_rest.size(); ++r)
        for (std::size_t a = 0; a < off_in.size(); ++a)
            gathered(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(r)) =
                f.values(static_cast<Eigen::Index>(off_in[a] + off_rest[r]));
    Eigen::MatrixXd mapped = op(gathered);
    const std::size_t out_states = ipow(f.q, out.size());
    if (static_cast<std::size_t>(mapped.rows()) != out_states || mapped.cols() != gathered.cols())
        throw Error(Errc::DomainMismatch, "block operator returned a wrongly shaped matrix");
    const auto off_out = offsets(result_domain, out, f.q);
    const auto off_rest2 = offsets(result_domain, rest, f.q);
    Eigen::VectorXd v(static_cast<Eigen::Index>(ipow(f.q, result_domain.size())));
    for (std::size_t r = 0; r < off_rest2.size(); ++r)
        for (std::size_t o = 0; o < off_out.size(); ++o)
            v(static_cast<Eigen::Index>(off_out[o] + off_rest2[r])) =
                mapped(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(r));
    return DenseFunction(result_domain, f.q, std::move(v));
}

namespace {

void subsets_of_size(const Domain& vars, std::size_t k, std::size_t start, Domain& cur, std::vector<Domain>& out) {
    if (cur.size() == k) {
        out.push_back(cur);
        return;
    }
    for (std::size_t i = start; i < vars.size(); ++i) {
        cur.push_back(vars[i]);
        subsets_of_size(vars, k, i + 1, cur, out);
        cur.pop_back();
    }
}

}  // namespace

SubspaceBasis indicator_basis(const Domain& vars, int q, int max_support) {
    const std::size_t n = checked_states(q, vars.size(), "indicator basis");
    std::vector<Eigen::VectorXd> cols;
    const std::size_t kmax = std::min<std::size_t>(vars.size(), static_cast<std::size_t>(std::max(max_support, 0)));
    for (std::size_t k = 0; k <= kmax; ++k) {
        std::vector<Domain> subsets;
        Domain cur;
        subsets_of_size(vars, k, 0, cur, subsets);
        for (const auto& S : subsets) {
            const auto off_s = offsets(vars, S, q);
            const auto off_r = offsets(vars, domain_minus(vars, S), q);
            // States in {0..q-2}^S, lexicographic.
            const std::size_t cnt = ipow(q - 1, S.size());
            for (std::size_t idx = 0; idx < cnt; ++idx) {
                std::size_t flat = 0, rem = idx, mult = 1;
                for (std::size_t j = S.size(); j-- > 0;) {
                    std::size_t s = rem % static_cast<std::size_t>(q - 1);
                    rem /= static_cast<std::size_t>(q - 1);
                    flat += s * mult;
                    mult *= static_cast<std::size_t>(q);
                }
                Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
                for (std::size_t r : off_r) v(static_cast<Eigen::Index>(off_s[flat] + r)) = 1.0;
                cols.push_back(std::move(v));
            }
        }
    }
    SubspaceBasis b;
    b.domain = vars;
    b.q = q;
    b.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) b.vectors.col(static_cast<Eigen::Index>(i)) = cols[i];
    return b;
}

SubspaceBasis greedy_reduce(const SubspaceBasis& spanning, double tol) {
    std::vector<Eigen::VectorXd> ortho;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < spanning.vectors.cols(); ++i) {
        Eigen::VectorXd v = spanning.vectors.col(i);
        const double n0 = v.norm();
        if (n0 == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& e : ortho) v -= e.dot(v) * e;
        const double n1 = v.norm();
        if (n1 > tol * n0) {
            ortho.push_back(v / n1);
            keep.push_back(i);
        }
    }
    SubspaceBasis out;
    out.domain = spanning.domain;
    out.q = spanning.q;
    out.vectors.resize(spanning.vectors.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) out.vectors.col(static_cast<Eigen::Index>(j)) = spanning.vectors.col(keep[j]);
    return out;
}

SubspaceBasis tensor_basis(const std::vector<SubspaceBasis>& parts) {
    SubspaceBasis acc;
    acc.domain = {};
    acc.q = parts.empty() ? 2 : parts.front().q;
    acc.vectors = Eigen::MatrixXd::Ones(1, 1);
    for (const auto& p : parts) {
        if (!domain_disjoint(acc.domain, p.domain))
            throw Error(Errc::OverlappingDomains, "tensor basis factors must have disjoint domains");
        const Domain u = domain_union(acc.domain, p.domain);
        const std::size_t n = checked_states(acc.q, u.size(), "tensor basis");
        const auto off_a = offsets(u, acc.domain, acc.q);
        const auto off_p = offsets(u, p.domain, acc.q);
        Eigen::MatrixXd m(static_cast<Eigen::Index>(n), acc.vectors.cols() * p.vectors.cols());
        for (Eigen::Index i = 0; i < acc.vectors.cols(); ++i)
            for (Eigen::Index j = 0; j < p.vectors.cols(); ++j) {
                const Eigen::Index col = i * p.vectors.cols() + j;
                for (std::size_t a = 0; a < off_a.size(); ++a) {
                    const double x = acc.vectors(static_cast<Eigen::Index>(a), i);
                    for (std::size_t b = 0; b < off_p.size(); ++b)
                        m(static_cast<Eigen::Index>(off_a[a] + off_p[b]), col) = x * p.vectors(static_cast<Eigen::Index>(b), j);
                }
            }
        acc.domain = u;
        acc.vectors = std::move(m);
    }
    return acc;
}

SubspaceBasis orthonormalize(const SubspaceBasis& b, double tol, double scale) {
    SubspaceBasis out;
    out.domain = b.domain;
    out.q = b.q;
    if (b.vectors.cols() == 0) {
        out.vectors.resize(b.vectors.rows(), 0);
        return out;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.vectors, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    const double smax = s.size() ? s(0) : 0.0;
    const double floor = tol * std::max({smax, scale, 1e-300});
    while (r < s.size() && s(r) > floor) ++r;
    out.vectors = svd.matrixU().leftCols(r);
    return out;
}

double span_residual(const DenseFunction& f, const SubspaceBasis& ortho) {
    if (f.domain != ortho.domain) throw Error(Errc::DomainMismatch, "residual needs matching domains");
    Eigen::VectorXd r = f.values - ortho.vectors * (ortho.vectors.transpose() * f.values);
    return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

DenseFunction tensor_project(const DenseFunction& f, const std::vector<SubspaceBasis>& factors) {
    Domain all;
    for (const auto& b : factors) {
        if (!domain_disjoint(all, b.domain)) throw Error(Errc::OverlappingDomains, "projector blocks overlap");
        all = domain_union(all, b.domain);
    }
    if (all != f.domain) throw Error(Errc::DomainMismatch, "projector blocks must partition the domain");
    DenseFunction g = f;
    for (const auto& b : factors) {
        const Eigen::MatrixXd& Q = b.vectors;
        g = apply_block(g, b.domain, b.domain, [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
            return Q * (Q.transpose() * x);
        });
    }
    return g;
}

double tensor_residual(const DenseFunction& f, const std::vector<SubspaceBasis>& factors) {
    return max_norm(subtract(f, tensor_project(f, factors)));
}

SubspaceBasis tk_basis(const RootedTree& t, const TransitionChain& c, int u, int K) {
    if (K < 0 || K > 30) throw Error(Errc::InvalidArgument, "K out of range");
    const Domain leaves = t.leaves_below(u);
    checked_states(c.q(), leaves.size(), "T_K basis");
    SubspaceBasis b = indicator_basis(leaves, c.q(), 1 << K);
    const DenseFunction law = subtree_law(t, c, u, leaves);
    Eigen::MatrixXd g = b.vectors.transpose() * law.values.asDiagonal() * b.vectors;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    const double top = es.eigenvalues().size() ? es.eigenvalues().maxCoeff() : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > 1e-10 * std::max(top, 1.0)) ++rank;
    b.gram_rank = rank;
    return b;
}

SubspaceBasis tt_basis(const RootedTree& t, int q, const VertexSet& a, int K) {
    std::vector<SubspaceBasis> parts;
    VertexSet sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int v : sorted) parts.push_back(indicator_basis(t.leaves_below(v), q, 1 << K));
    return tensor_basis(parts);
}

}  // namespace botlab
