#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace botlab {

// Ergodic finite-state channel M with stationary law and spectral data.
class TransitionChain {
public:
    int q() const { return static_cast<int>(rows_.rows()); }
    const Eigen::MatrixXd& rows() const { return rows_; }
    const Eigen::VectorXd& pi() const { return pi_; }
    double lambda() const { return lambda_; }
    bool ergodic() const { return ergodic_; }
    // Full spectrum sorted by decreasing modulus; index 0 is the Perron root.
    const std::vector<std::complex<double>>& spectrum() const { return spectrum_; }
    double at(int i, int j) const { return rows_(i, j); }

    // M^k, computed by repeated squaring.
    Eigen::MatrixXd power(int k) const;

private:
    friend TransitionChain validate_chain(const Eigen::MatrixXd&);
    Eigen::MatrixXd rows_;
    Eigen::VectorXd pi_;
    double lambda_ = 0.0;
    bool ergodic_ = false;
    std::vector<std::complex<double>> spectrum_;
};

TransitionChain validate_chain(const Eigen::MatrixXd& rows);
TransitionChain validate_chain(const std::vector<std::vector<double>>& rows);

// Binary symmetric channel with flip probability delta.
TransitionChain bsc(double delta);

double ks_parameter(const TransitionChain& chain, int d);

struct DecayParameters {
    double eps = 0.0;
    double lambda_eps = 0.0;
    double lambda_tilde_eps = 0.0;
    double kappa = 0.0;
    long h_diamond = 0;
    long m = 0;
    double cr = 1.0;
};

// Solution x of max{d x^2, x} = t on (0,1).
double solve_two_branch(double t, int d);

DecayParameters decay_parameters(const TransitionChain& chain, int d, double R = 1.0, double cr = 1.0);

// Max-norm operator norm of f -> M^k f over pi-mean-zero f.
double markov_decay_probe(const TransitionChain& chain, int k);

}  // namespace botlab
