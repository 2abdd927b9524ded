#pragma once

#include "botlab/operators.hpp"

#include <vector>

namespace botlab {

struct DecayProbeReport {
    int K = 0;
    std::vector<int> heights;
    std::vector<double> delta;  // measured δ(h) at the first vertex of each height
    double fitted_rate = 0.0;   // least-squares slope of log δ against h
    int h_K_empirical = -1;     // smallest probed h with δ(h) <= 1, -1 if none
};

DecayProbeReport decay_probe(const RootedTree& t, const TransitionChain& c, int K, const std::vector<int>& heights);

// Var(E[f | X_root]) / Var(f) for f = Σ_S φ_S, exact via pairwise Steiner laws.
double var_ratio(const RootedTree& t, const TransitionChain& c, const EsPolynomial& f);

struct VarianceParts {
    double root_variance = 0.0;  // Var(E[f | X_root])
    double total_variance = 0.0; // Var(f)
    double diagonal = 0.0;       // Σ_S Var(φ_S)
};
VarianceParts variance_parts(const RootedTree& t, const TransitionChain& c, const EsPolynomial& f);

}  // namespace botlab
