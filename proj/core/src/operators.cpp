#include "botlab/operators.hpp"

#include "botlab/error.hpp"

#include <algorithm>
#include <cmath>

namespace botlab {

namespace {

constexpr std::size_t kMaxMatrixEntries = std::size_t{1} << 26;

Domain within_subtree(const RootedTree& t, const Domain& d, int v) {
    Domain out;
    for (int x : d)
        if (t.is_below(x, v)) out.push_back(x);
    return out;
}

VertexSet sorted_members(const VertexSet& a) {
    VertexSet s = a;
    std::sort(s.begin(), s.end());
    return s;
}

void require_cover(const RootedTree& t, const VertexSet& A, const Domain& d) {
    for (int x : d) {
        bool ok = false;
        for (int v : A)
            if (t.is_below(x, v)) {
                ok = true;
                break;
            }
        if (!ok) throw Error(Errc::DomainMismatch, "variable outside the antichain's subtrees");
    }
}

}  // namespace

DenseFunction LinearMapMatrix::apply(const DenseFunction& f) const {
    return apply_block(f, input_domain, output_domain, [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return entries * x; });
}

LinearMapMatrix compose(const LinearMapMatrix& outer, const LinearMapMatrix& inner) {
    if (outer.input_domain != inner.output_domain) throw Error(Errc::DomainMismatch, "composition domains differ");
    return LinearMapMatrix{inner.input_domain, outer.output_domain, outer.q, outer.entries * inner.entries};
}

LinearMapMatrix kron(const LinearMapMatrix& a, const LinearMapMatrix& b) {
    if (!domain_disjoint(a.input_domain, b.input_domain) || !domain_disjoint(a.output_domain, b.output_domain))
        throw Error(Errc::OverlappingDomains, "Kronecker factors must act on disjoint domains");
    LinearMapMatrix r;
    r.q = a.q;
    r.input_domain = domain_union(a.input_domain, b.input_domain);
    r.output_domain = domain_union(a.output_domain, b.output_domain);
    const std::size_t rows = checked_states(a.q, r.output_domain.size(), "operator output");
    const std::size_t cols = checked_states(a.q, r.input_domain.size(), "operator input");
    if (rows * cols > kMaxMatrixEntries) throw Error(Errc::SizeLimit, "operator matrix too large");
    const auto oa = offsets(r.output_domain, a.output_domain, a.q);
    const auto ob = offsets(r.output_domain, b.output_domain, a.q);
    const auto ia = offsets(r.input_domain, a.input_domain, a.q);
    const auto ib = offsets(r.input_domain, b.input_domain, a.q);
    r.entries.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < oa.size(); ++i)
        for (std::size_t k = 0; k < ia.size(); ++k) {
            const double x = a.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
            for (std::size_t j = 0; j < ob.size(); ++j)
                for (std::size_t l = 0; l < ib.size(); ++l)
                    r.entries(static_cast<Eigen::Index>(oa[i] + ob[j]), static_cast<Eigen::Index>(ia[k] + ib[l])) =
                        x * b.entries(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
        }
    return r;
}

LinearMapMatrix cond_expect_op(const RootedTree& t, const TransitionChain& c, int u, OpKind kind,
                               std::optional<Domain> input) {
    const Domain in = input ? *input : t.leaves_below(u);
    const std::size_t cols = checked_states(c.q(), in.size(), "operator input");
    LinearMapMatrix r;
    r.q = c.q();
    r.input_domain = in;
    if (kind == OpKind::I) {
        if (cols * cols > kMaxMatrixEntries) throw Error(Errc::SizeLimit, "identity matrix too large");
        r.output_domain = in;
        r.entries = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(cols), static_cast<Eigen::Index>(cols));
        return r;
    }
    Eigen::MatrixXd k = conditional_kernel(t, c, u, in);
    Eigen::RowVectorXd mean = c.pi().transpose() * k;
    switch (kind) {
    case OpKind::Ehat:
        r.output_domain = {u};
        r.entries = std::move(k);
        break;
    case OpKind::E:
        r.output_domain = {};
        r.entries = mean;
        break;
    case OpKind::D:
        r.output_domain = {u};
        r.entries = k.rowwise() - mean;
        break;
    case OpKind::I:
        break;
    }
    return r;
}

LinearMapMatrix antichain_tensor(const RootedTree& t, const TransitionChain& c,
                                 const std::vector<std::pair<int, OpKind>>& ops, std::optional<Domain> input) {
    std::vector<std::pair<int, OpKind>> sorted = ops;
    std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return a.first < b.first; });
    VertexSet A;
    for (auto [v, k] : sorted) A.push_back(v);
    if (!is_antichain(t, A)) throw Error(Errc::NotAntichain, "operator members are comparable");
    Domain in;
    if (input) {
        in = *input;
        require_cover(t, A, in);
    } else {
        for (int v : A) in = domain_union(in, t.leaves_below(v));
    }
    LinearMapMatrix acc{{}, {}, c.q(), Eigen::MatrixXd::Ones(1, 1)};
    for (auto [v, kind] : sorted) acc = kron(acc, cond_expect_op(t, c, v, kind, within_subtree(t, in, v)));
    return acc;
}

DenseFunction antichain_law(const RootedTree& t, const TransitionChain& c, const VertexSet& A, const Domain& domain) {
    const VertexSet s = sorted_members(A);
    require_cover(t, s, domain);
    std::vector<DenseFunction> parts;
    for (int v : s) {
        Domain d = within_subtree(t, domain, v);
        if (!d.empty()) parts.push_back(subtree_law(t, c, v, d));
    }
    if (parts.empty()) return DenseFunction::constant({}, c.q(), 1.0);
    return tensor_identify(parts);
}

namespace {

DenseFunction per_vertex(const RootedTree& t, const TransitionChain& c, const VertexSet& A, const DenseFunction& f,
                         bool centred) {
    const VertexSet s = sorted_members(A);
    if (!is_antichain(t, s)) throw Error(Errc::NotAntichain, "members are comparable");
    require_cover(t, s, f.domain);
    DenseFunction g = f;
    for (int v : s) {
        const Domain block = within_subtree(t, g.domain, v);
        Eigen::MatrixXd k = conditional_kernel(t, c, v, block);
        if (centred) {
            Eigen::RowVectorXd mean = c.pi().transpose() * k;
            k.rowwise() -= mean;
        }
        g = apply_block(g, block, {v}, [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return k * x; });
    }
    return g;
}

}  // namespace

DenseFunction cond_expect(const RootedTree& t, const TransitionChain& c, const VertexSet& A, const DenseFunction& f) {
    return per_vertex(t, c, A, f, false);
}

DenseFunction diff_op(const RootedTree& t, const TransitionChain& c, const VertexSet& A, const DenseFunction& f) {
    return per_vertex(t, c, A, f, true);
}

double expect_antichain(const RootedTree& t, const TransitionChain& c, const VertexSet& A, const DenseFunction& f) {
    return expect(antichain_law(t, c, A, f.domain), f);
}

double u_norm(const RootedTree& t, const TransitionChain& c, const VertexSet& A, const DenseFunction& f) {
    const double e = expect_antichain(t, c, A, multiply(f, f));
    return std::sqrt(std::max(e, 0.0));
}

DenseFunction t_norm_law(const RootedTree& t, const TransitionChain& c, int u, int m) {
    const VertexSet dm = dm_set(t, u, m);
    std::vector<DenseFunction> parts;
    parts.push_back(subtree_law(t, c, u, dm));
    for (int v : dm) parts.push_back(subtree_law(t, c, v, t.leaves_below(v)));
    return tensor_identify(parts);
}

double t_norm(const RootedTree& t, const TransitionChain& c, int u, int m, const DenseFunction& f) {
    const DenseFunction law = t_norm_law(t, c, u, m);
    if (!domain_subset(f.domain, law.domain)) throw Error(Errc::DomainMismatch, "T-norm needs a function of D_m(u) and L_u");
    return std::sqrt(std::max(expect(law, multiply(f, f)), 0.0));
}

double norm_eval(NormKind kind, const DenseFunction& f, const RootedTree& t, const TransitionChain& c,
                 const NormContext& ctx) {
    switch (kind) {
    case NormKind::Max: return max_norm(f);
    case NormKind::U: return u_norm(t, c, ctx.A, f);
    case NormKind::T: return t_norm(t, c, ctx.u, ctx.m, f);
    }
    return 0.0;
}

Eigen::MatrixXd psd_pinv(const Eigen::MatrixXd& g, double cutoff, int* rank) {
    if (g.size() == 0) {
        if (rank) *rank = 0;
        return Eigen::MatrixXd::Zero(g.rows(), g.cols());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    const auto& ev = es.eigenvalues();
    const double top = ev.size() ? std::max(ev.maxCoeff(), 0.0) : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    int r = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (top > 0.0 && ev(i) > cutoff * top) {
            inv(i) = 1.0 / ev(i);
            ++r;
        }
    if (rank) *rank = r;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

double bilinear_decay_constant(const RootedTree& t, const TransitionChain& c, const VertexSet& A,
                               const SubspaceBasis& basis, double cutoff) {
    const VertexSet s = sorted_members(A);
    const DenseFunction law = antichain_law(t, c, s, basis.domain);
    const Eigen::MatrixXd& B = basis.vectors;
    if (B.cols() == 0) return 0.0;
    Eigen::MatrixXd g = B.transpose() * law.values.asDiagonal() * B;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    const auto& ev = es.eigenvalues();
    const double top = ev.size() ? std::max(ev.maxCoeff(), 0.0) : 0.0;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (top > 0.0 && ev(i) > cutoff * top) keep.push_back(i);
    if (keep.empty()) return 0.0;
    Eigen::MatrixXd w(g.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        w.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) / std::sqrt(ev(keep[j]));
    const Eigen::MatrixXd e = B * w;  // E_A-orthonormal functions
    std::vector<std::pair<int, OpKind>> ops;
    for (int v : s) ops.push_back({v, OpKind::Ehat});
    const LinearMapMatrix k = antichain_tensor(t, c, ops, basis.domain);
    double best = 0.0;
    for (Eigen::Index x = 0; x < k.entries.rows(); ++x) {
        Eigen::VectorXd delta = k.entries.row(x).transpose() - law.values;
        Eigen::MatrixXd form = e.transpose() * delta.asDiagonal() * e;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> fs(form, Eigen::EigenvaluesOnly);
        best = std::max(best, fs.eigenvalues().cwiseAbs().maxCoeff());
    }
    return best;
}

}  // namespace botlab
