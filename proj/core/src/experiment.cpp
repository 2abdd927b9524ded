#include "botlab/experiment.hpp"

#include "botlab/error.hpp"
#include "botlab/inference.hpp"
#include "botlab/io.hpp"
#include "botlab/probes.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

namespace botlab {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(Errc::ConfigInvalid, msg); }

void only_keys(const json& j, const std::set<std::string>& ok, const std::string& what) {
    if (!j.is_object()) invalid(what + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) invalid(what + ": unknown key '" + k + "'");
}

template <class T>
T field(const json& j, const char* key, T def) {
    if (!j.contains(key)) return def;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        invalid(std::string("bad value for '") + key + "'");
    }
}

std::string resolve(const std::string& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (std::filesystem::path(base) / path).string();
}

EsPolynomial random_es(const FamilySpec& fam, std::uint64_t master, const RootedTree& t, int q, int depth) {
    auto rng = derived_rng(fam.seed ^ master, static_cast<std::uint64_t>(depth));
    const Domain leaves = t.leaves();
    const int k = std::min<int>(fam.degree, static_cast<int>(leaves.size()));
    EsPolynomial f;
    f.q = q;
    for (int s = 0; s < fam.terms; ++s) {
        VertexSet sup;
        while (static_cast<int>(sup.size()) < k) {
            const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(leaves.size()));
            const int v = leaves[std::min(i, leaves.size() - 1)];
            if (std::find(sup.begin(), sup.end(), v) == sup.end()) sup.push_back(v);
        }
        std::sort(sup.begin(), sup.end());
        LocalFunction phi{sup, {}};
        for (std::size_t j = 0; j < ipow(q, sup.size()); ++j) phi.table.push_back(2.0 * uniform01(rng) - 1.0);
        f.terms.push_back(std::move(phi));
    }
    return f;
}

}  // namespace

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

ExperimentConfig parse_experiment_config(const std::string& json_text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        invalid(std::string("config is not valid JSON: ") + e.what());
    }
    only_keys(j, {"chain", "d", "depth_min", "depth_max", "R", "family", "K", "cr", "output", "seed"}, "config");
    ExperimentConfig cfg;
    if (!j.contains("chain")) invalid("config: missing chain");
    try {
        const json& ch = j["chain"];
        TransitionChain c = ch.is_string() ? load_chain(resolve(base_dir, ch.get<std::string>()))
                                           : parse_chain_json(ch.dump());
        cfg.chain.assign(static_cast<std::size_t>(c.q()), {});
        for (int a = 0; a < c.q(); ++a)
            for (int b = 0; b < c.q(); ++b) cfg.chain[a].push_back(c.at(a, b));
    } catch (const Error& e) {
        if (e.code() == Errc::InvalidArgument) invalid(std::string("config chain: ") + e.what());
        throw;
    }
    cfg.d = field<int>(j, "d", 2);
    cfg.depth_min = field<int>(j, "depth_min", 1);
    cfg.depth_max = field<int>(j, "depth_max", cfg.depth_min);
    cfg.R = field<double>(j, "R", 1.0);
    cfg.K = field<int>(j, "K", 0);
    cfg.cr = field<double>(j, "cr", 1.0);
    cfg.output = field<std::string>(j, "output", "");
    cfg.seed = field<std::uint64_t>(j, "seed", 0);
    if (cfg.d < 1) invalid("d must be >= 1");
    if (cfg.depth_min < 1 || cfg.depth_max < cfg.depth_min) invalid("need 1 <= depth_min <= depth_max");
    if (!(cfg.R >= 1.0)) invalid("R must be >= 1");
    if (cfg.K < 0) invalid("K must be >= 0");
    if (!(cfg.cr > 0.0)) invalid("cr must be positive");
    if (j.contains("family")) {
        const json& fj = j["family"];
        only_keys(fj, {"kind", "degree", "terms", "seed", "path"}, "family");
        const std::string kind = field<std::string>(fj, "kind", "census");
        if (kind == "census") {
            cfg.family.kind = FamilyKind::Census;
        } else if (kind == "random-es") {
            cfg.family.kind = FamilyKind::RandomEs;
        } else if (kind == "file") {
            cfg.family.kind = FamilyKind::File;
        } else {
            invalid("unknown family kind '" + kind + "'");
        }
        cfg.family.degree = field<int>(fj, "degree", 1);
        cfg.family.terms = field<int>(fj, "terms", 8);
        cfg.family.seed = field<std::uint64_t>(fj, "seed", 0);
        cfg.family.path = fj.contains("path") ? resolve(base_dir, field<std::string>(fj, "path", "")) : "";
        if (cfg.family.degree < 1) invalid("degree must be >= 1");
        if (cfg.family.terms < 1) invalid("terms must be >= 1");
        if (cfg.family.kind == FamilyKind::File) {
            if (cfg.family.path.empty()) invalid("family file needs a path");
            if (cfg.depth_min != cfg.depth_max) invalid("an explicit polynomial fixes the depth");
        }
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        invalid(e.what());
    }
    return parse_experiment_config(text, std::filesystem::path(path).parent_path().string());
}

std::vector<SweepRow> decay_sweep_rows(const ExperimentConfig& cfg) {
    const TransitionChain c = validate_chain(cfg.chain);
    const double ks = ks_parameter(c, cfg.d);
    std::optional<double> eps;
    if (ks < 1.0) {
        try {
            eps = decay_parameters(c, cfg.d, cfg.R, cfg.cr).eps;
        } catch (const Error& e) {
            if (e.code() != Errc::DegenerateSpectrum) throw;
        }
    }
    // Fail before any work when the deepest tree is over the vertex cap.
    std::size_t total = 0, layer = 1;
    for (int l = 0; l <= cfg.depth_max; ++l) {
        total += layer;
        if (total > size_cap()) throw Error(Errc::SizeLimit, "depth_max exceeds the vertex cap");
        layer *= static_cast<std::size_t>(cfg.d);
    }
    std::vector<SweepRow> rows;
    for (int depth = cfg.depth_min; depth <= cfg.depth_max; ++depth) {
        const RootedTree t = build_dary(cfg.d, depth);
        EsPolynomial f;
        switch (cfg.family.kind) {
        case FamilyKind::Census: f = census_polynomial(t, c); break;
        case FamilyKind::RandomEs: f = random_es(cfg.family, cfg.seed, t, c.q(), depth); break;
        case FamilyKind::File: f = load_polynomial(cfg.family.path); break;
        }
        SweepRow r;
        r.depth = depth;
        r.es_degree = es_degree(f);
        r.var_ratio = var_ratio(t, c, f);
        r.ks_param = ks;
        if (eps) {
            r.eps = *eps;
            r.ref_bound = std::exp(-*eps * depth);
        }
        rows.push_back(r);
    }
    return rows;
}

std::string run_decay_sweep(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << kDecayCsvHeader << "\n";
    for (const auto& r : decay_sweep_rows(cfg)) {
        out << r.depth << ',' << r.es_degree << ',' << format_real(r.var_ratio) << ',' << format_real(r.ks_param) << ','
            << (r.eps ? format_real(*r.eps) : "") << ',' << (r.ref_bound ? format_real(*r.ref_bound) : "") << "\n";
    }
    return out.str();
}

std::vector<KsSweepRow> ks_sweep_rows(const std::vector<double>& deltas, int d, int depth) {
    if (d < 1) invalid("d must be >= 1");
    if (depth < 2) invalid("ks sweep needs depth >= 2");
    std::vector<double> grid = deltas;
    std::sort(grid.begin(), grid.end());
    std::vector<KsSweepRow> rows;
    for (double delta : grid) {
        if (!(delta >= 0.0 && delta < 0.5)) invalid("BSC parameter must lie in [0, 0.5)");
        const TransitionChain c = bsc(delta);
        VarianceParts p[2];
        for (int i = 0; i < 2; ++i) {
            const RootedTree t = build_dary(d, depth - 1 + i);
            p[i] = variance_parts(t, c, census_polynomial(t, c));
        }
        KsSweepRow r;
        r.delta = delta;
        r.d = d;
        r.depth = depth;
        r.ks_param = ks_parameter(c, d);
        r.succ_ratio = (p[1].root_variance / p[1].total_variance) / (p[0].root_variance / p[0].total_variance);
        r.diag_growth = (p[1].root_variance / p[1].diagonal) / (p[0].root_variance / p[0].diagonal);
        rows.push_back(r);
    }
    return rows;
}

std::string run_ks_sweep(const std::vector<double>& deltas, int d, int depth) {
    std::ostringstream out;
    out << kKsCsvHeader << "\n";
    for (const auto& r : ks_sweep_rows(deltas, d, depth))
        out << format_real(r.delta) << ',' << r.d << ',' << r.depth << ',' << format_real(r.ks_param) << ','
            << format_real(r.succ_ratio) << ',' << format_real(r.diag_growth) << "\n";
    return out.str();
}

}  // namespace botlab
