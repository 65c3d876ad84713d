#pragma once

// Euler-Maruyama simulation of the chain SDE (noise enters block 1 only) and
// the Monte Carlo Feynman-Kac estimator. Random increments come from a
// counter-based generator keyed by (seed, path, step, component), so results
// are bit-identical for any thread count.

#include <Eigen/Dense>
#include <cstdint>

#include "schauder/model.hpp"

namespace schauder {

struct McConfig {
    long paths = 10000;
    int steps = 100;
    std::uint64_t seed = 0;
    bool antithetic = false;
    int threads = 0;  // 0 = SCHAUDER_LAB_THREADS or hardware
};

// Standard normal increment for (seed, path, step, component).
double gaussian_increment(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                          std::uint64_t component);

// Endpoint samples of the chain at time s started from (t, x); one row per path.
Eigen::MatrixXd simulate_chain(const ChainProblem& problem, double t, const Eigen::VectorXd& x,
                               double s, const McConfig& cfg);

struct FkResult {
    double estimate = 0.0;
    double halfwidth = 0.0;  // 1.96 sample-std / sqrt(paths)
    long paths = 0;
    int steps = 0;
    std::uint64_t seed = 0;
};

// mean over paths of g(X_T) + sum_k f(s_k, X_{s_k}) dt.
FkResult fk_estimate(const ChainProblem& problem, double t, const Eigen::VectorXd& x,
                     const McConfig& cfg);

// Exact E[g(X_T)] for affine drift, constant diffusion, polynomial g of degree
// <= 2 (mean by augmented matrix exponential, covariance from the proxy).
double gaussian_chain_oracle(const ChainProblem& problem, double t, const Eigen::VectorXd& x,
                             const TerminalData& g);

}  // namespace schauder
