#pragma once

#include "botlab/broadcast.hpp"

#include <functional>
#include <vector>

namespace botlab {

struct RootPosterior {
    std::vector<double> probs;
    double log_evidence = 0.0;  // log P(X_L = observation)
};

// Upward message passing with per-vertex normalisation.
RootPosterior bp_posterior(const RootedTree& t, const TransitionChain& c, const Labeling& leaf_obs);
// Argmax state, lowest index on ties.
int map_root(const RootPosterior& posterior);

// Right eigenvector of the second eigenvalue, mean zero and unit variance
// under π, first nonzero entry positive.
std::vector<double> census_weight(const TransitionChain& c);
double census_estimator(const RootedTree& t, const TransitionChain& c, const Labeling& leaf_obs);
// The census statistic as an Efron-Stein degree-1 polynomial of the leaves.
EsPolynomial census_polynomial(const RootedTree& t, const TransitionChain& c);

using LeafEstimator = std::function<double(const Labeling&)>;

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

// Sample Pearson correlation of estimator(X_L) with w(X_root), stationary root,
// trial i drawn from stream (seed, i).
McEstimate mc_correlation(const RootedTree& t, const TransitionChain& c, const LeafEstimator& estimator,
                          long trials, std::uint64_t seed);

}  // namespace botlab
