#pragma once

#include "botlab/chain.hpp"
#include "botlab/tree.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace botlab {

struct CheckReport {
    std::string check_name;
    long instances = 0;
    long skipped = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;
    std::string worst_case = "{}";  // JSON object describing the worst instance
    bool pass = true;
};

struct VerifyOptions {
    long trials = 0;          // 0: per-check default
    bool corrupt_pi = false;  // negative control: perturb Π output in check_projections
};

CheckReport check_tower(std::uint64_t seed, long trials);
CheckReport check_submultiplicativity(std::uint64_t seed, long trials);
CheckReport check_telescoping(std::uint64_t seed, long trials);
CheckReport check_projections(std::uint64_t seed, long trials, bool corrupt_pi = false);
CheckReport check_decomposition(std::uint64_t seed, long trials);
CheckReport check_norm_family(std::uint64_t seed, long trials);

std::vector<CheckReport> run_verify_suite(std::uint64_t seed, const VerifyOptions& opts = {});
bool all_pass(const std::vector<CheckReport>& reports);
std::string reports_to_json(const std::vector<CheckReport>& reports);

// Random instances shared by the checks.
// Ergodic chain with entries bounded away from 0, or with some zeros when zero_prob > 0.
TransitionChain random_chain(std::mt19937_64& rng, int q, double zero_prob = 0.0);
// Tree with every leaf at the given depth and 1..max_children children per internal vertex.
RootedTree random_layered_tree(std::mt19937_64& rng, int depth, int max_children, int max_vertices);

}  // namespace botlab
