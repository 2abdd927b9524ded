#include "botlab/decomposition.hpp"
#include "botlab/error.hpp"
#include "botlab/experiment.hpp"
#include "botlab/inference.hpp"
#include "botlab/io.hpp"
#include "botlab/probes.hpp"
#include "botlab/projections.hpp"
#include "botlab/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <iostream>

using namespace botlab;
using nlohmann::json;

namespace {

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text_file(path, text);
}

json chain_summary(const TransitionChain& c, int d) {
    json spec = json::array();
    for (const auto& z : c.spectrum()) spec.push_back(json{{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}});
    json out{{"q", c.q()},
             {"pi", std::vector<double>(c.pi().data(), c.pi().data() + c.q())},
             {"lambda", c.lambda()},
             {"spectrum", spec},
             {"d", d},
             {"ks_param", ks_parameter(c, d)}};
    if (ks_parameter(c, d) < 1.0) {
        try {
            const DecayParameters p = decay_parameters(c, d);
            out["decay"] = json{{"eps", p.eps},
                                {"lambda_eps", p.lambda_eps},
                                {"lambda_tilde_eps", p.lambda_tilde_eps},
                                {"kappa", p.kappa},
                                {"h_diamond", p.h_diamond},
                                {"m", p.m}};
        } catch (const Error& e) {
            out["decay"] = json{{"error", errc_name(e.code())}};
        }
    }
    return out;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const std::size_t next = s.find(',', pos);
        const std::string tok = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        if (!tok.empty()) {
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw Error(Errc::InvalidArgument, "not a number: " + tok);
            }
        }
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"botlab: broadcasting on trees"};
    app.require_subcommand(1);

    std::string chain_file, tree_file, obs_file, config_file, out_file, report_file;
    int d = 2, K = 0, count = 1, root_state = -1, depth = 8;
    std::uint64_t seed = 0;
    long trials = 0;
    bool corrupt_pi = false;
    std::string deltas, heights;
    int dump_vertex = -1;
    std::string dump_prefix = "pi";

    auto* chain_cmd = app.add_subcommand("chain", "Validate a chain and print its spectral summary");
    chain_cmd->add_option("file", chain_file, "Chain JSON")->required();
    chain_cmd->add_option("--d", d, "Arity used for the KS parameter");

    auto* sample_cmd = app.add_subcommand("sample", "Sample broadcast labelings as CSV");
    sample_cmd->add_option("--chain", chain_file)->required();
    sample_cmd->add_option("--tree", tree_file)->required();
    sample_cmd->add_option("--count", count)->check(CLI::PositiveNumber);
    sample_cmd->add_option("--seed", seed);
    sample_cmd->add_option("--root-state", root_state, "Fix the root state (default: stationary)");
    sample_cmd->add_option("--out", out_file);

    auto* bp_cmd = app.add_subcommand("bp", "Exact root posterior from leaf observations");
    bp_cmd->add_option("--chain", chain_file)->required();
    bp_cmd->add_option("--tree", tree_file)->required();
    bp_cmd->add_option("--obs", obs_file)->required();
    bp_cmd->add_option("--out", out_file);

    auto* decay_cmd = app.add_subcommand("decay", "Exact variance-ratio sweep over depth");
    decay_cmd->add_option("--config", config_file)->required();
    decay_cmd->add_option("--out", out_file);

    auto* ks_cmd = app.add_subcommand("ks-sweep", "Census statistic across a BSC grid");
    ks_cmd->add_option("--deltas", deltas, "Comma separated BSC parameters");
    ks_cmd->add_option("--d", d);
    ks_cmd->add_option("--depth", depth);
    ks_cmd->add_option("--out", out_file);

    auto* verify_cmd = app.add_subcommand("verify", "Run the property-check suite");
    verify_cmd->add_option("--seed", seed);
    verify_cmd->add_option("--trials", trials, "Trials per check (default: per-check)");
    verify_cmd->add_option("--report", report_file);
    verify_cmd->add_flag("--corrupt-pi", corrupt_pi)->group("");

    auto* probe_cmd = app.add_subcommand("probe", "Measure the decay constant delta(h) by height");
    probe_cmd->add_option("--K", K)->required();
    probe_cmd->add_option("--chain", chain_file)->required();
    probe_cmd->add_option("--tree", tree_file)->required();
    probe_cmd->add_option("--heights", heights, "Comma separated heights (default: 1..depth)");
    probe_cmd->add_option("--dump-pi", dump_vertex, "Also dump the matrix of the projection at this vertex");
    probe_cmd->add_option("--dump-prefix", dump_prefix);
    probe_cmd->add_option("--out", out_file);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*chain_cmd) {
            emit(chain_summary(load_chain(chain_file), d).dump(2) + "\n", "");
        } else if (*sample_cmd) {
            const TransitionChain c = load_chain(chain_file);
            const RootedTree t = load_tree(tree_file);
            const RootInit init = root_state >= 0 ? RootInit::fixed(root_state) : RootInit{};
            std::vector<Labeling> xs;
            for (int i = 0; i < count; ++i) xs.push_back(sample_labeling(t, c, init, seed, static_cast<std::uint64_t>(i)));
            emit(samples_to_csv(xs), out_file);
        } else if (*bp_cmd) {
            const TransitionChain c = load_chain(chain_file);
            const RootedTree t = load_tree(tree_file);
            const RootPosterior p = bp_posterior(t, c, load_observation(obs_file, t.n()));
            emit(json{{"posterior", p.probs}, {"map", map_root(p)}, {"log_evidence", p.log_evidence}}.dump(2) + "\n", out_file);
        } else if (*decay_cmd) {
            const ExperimentConfig cfg = load_experiment_config(config_file);
            emit(run_decay_sweep(cfg), out_file.empty() ? cfg.output : out_file);
        } else if (*ks_cmd) {
            emit(run_ks_sweep(parse_list(deltas), d, depth), out_file);
        } else if (*verify_cmd) {
            VerifyOptions opts;
            opts.trials = trials;
            opts.corrupt_pi = corrupt_pi;
            const auto reports = run_verify_suite(seed, opts);
            const std::string text = reports_to_json(reports);
            emit(text, report_file);
            for (const auto& r : reports)
                std::cerr << (r.pass ? "pass " : "FAIL ") << r.check_name << " max_residual=" << r.max_residual << "\n";
            return all_pass(reports) ? 0 : 1;
        } else if (*probe_cmd) {
            const TransitionChain c = load_chain(chain_file);
            const RootedTree t = load_tree(tree_file);
            std::vector<int> hs;
            if (heights.empty()) {
                for (int h = 1; h <= t.depth(); ++h) hs.push_back(h);
            } else {
                for (double h : parse_list(heights)) hs.push_back(static_cast<int>(h));
            }
            const DecayProbeReport rep = decay_probe(t, c, K, hs);
            json out{{"K", rep.K}, {"heights", rep.heights}, {"delta", rep.delta},
                     {"fitted_rate", std::isnan(rep.fitted_rate) ? json(nullptr) : json(rep.fitted_rate)},
                     {"h_K_empirical", rep.h_K_empirical}};
            if (dump_vertex >= 0) {
                dump_operator(projection_pi(t, c, dump_vertex, K), dump_prefix + ".csv", dump_prefix + ".json");
                out["dump"] = json{{"csv", dump_prefix + ".csv"}, {"sidecar", dump_prefix + ".json"}};
            }
            emit(out.dump(2) + "\n", out_file);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
