#pragma once

#include "botlab/chain.hpp"
#include "botlab/function_space.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace botlab {

enum class FamilyKind { Census, RandomEs, File };

struct FamilySpec {
    FamilyKind kind = FamilyKind::Census;
    int degree = 1;          // random-es support size
    int terms = 8;           // random-es term count
    std::uint64_t seed = 0;  // random-es seed
    std::string path;        // explicit polynomial file
};

struct ExperimentConfig {
    std::vector<std::vector<double>> chain;
    int d = 2;
    int depth_min = 1;
    int depth_max = 1;
    double R = 1.0;
    FamilySpec family;
    int K = 0;
    double cr = 1.0;
    std::string output;
    std::uint64_t seed = 0;
};

// Parses a JSON config; unknown keys and malformed values raise ConfigInvalid.
// Relative file paths are resolved against base_dir.
ExperimentConfig parse_experiment_config(const std::string& json_text, const std::string& base_dir = ".");
ExperimentConfig load_experiment_config(const std::string& path);

struct SweepRow {
    int depth = 0;
    int es_degree = 0;
    double var_ratio = 0.0;
    double ks_param = 0.0;
    std::optional<double> eps;        // only below KS
    std::optional<double> ref_bound;  // exp(-eps * depth)
};

std::vector<SweepRow> decay_sweep_rows(const ExperimentConfig& cfg);
std::string run_decay_sweep(const ExperimentConfig& cfg);  // CSV text

struct KsSweepRow {
    double delta = 0.0;
    int d = 0;
    int depth = 0;
    double ks_param = 0.0;
    double succ_ratio = 0.0;   // var_ratio(depth) / var_ratio(depth - 1)
    double diag_growth = 0.0;  // same ratio for Var(E[f|X_root]) / Σ_S Var(φ_S)
};

// Census statistic on the d-ary tree under BSC(δ) for each δ of the grid.
std::vector<KsSweepRow> ks_sweep_rows(const std::vector<double>& deltas, int d, int depth);
std::string run_ks_sweep(const std::vector<double>& deltas, int d, int depth);

// Decimal with 17 significant digits (round-trips every double).
std::string format_real(double x);

inline constexpr const char* kDecayCsvHeader = "depth,degree,var_ratio,ks_param,eps,ref_bound";
inline constexpr const char* kKsCsvHeader = "delta,d,depth,ks_param,succ_ratio,diag_growth";

}  // namespace botlab
