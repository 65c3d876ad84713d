#pragma once

// Lambda-rescaling of chain problems, the exact density correspondence between
// the scaled and base proxies, and the scaled covariance sensitivity at the
// critical regime-change time.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "schauder/model.hpp"

namespace schauder {

// F_l(t,x) = l^{1/2} T_l^{-1} F(t, l^{-1/2} T_l x), a_l = l^{-1} a(t, .),
// f_l, g_l composed with the inverse scaling. Accepts any lambda > 0; the
// (0,1] and T/lambda <= 1 restrictions apply to the scaled diagnostics.
ChainProblem rescale_problem(const ChainProblem& problem, double lambda);

// x -> l^{-1/2} T_l x.
Eigen::VectorXd scale_point(const Eigen::VectorXd& x, double lambda, const ChainDims& dims);

struct DensityScalingResult {
    double max_relative_residual = 0.0;
    int samples = 0;
};

// Compares p_l^{xi}(t,s,x,y) against l^{n^2 d / 2} p^{xi_l}(t,s,x_l,y_l) with
// both sides computed through independent proxy constructions.
DensityScalingResult density_scaling_check(const ChainProblem& problem, double lambda,
                                           int sample_points, std::uint64_t seed, const Box& box,
                                           int flow_steps = 256);

struct DerivativeScalingResult {
    double slope = 0.0;
    double predicted = 0.0;  // n^2 d / 2 + sum theta_i (i - 1/2)
};

// log-log regression of |D^theta p_lambda| at a whitening-fixed probe against
// lambda over the supplied ladder.
DerivativeScalingResult derivative_scaling_slope(const ChainProblem& problem,
                                                 const std::vector<int>& theta,
                                                 const std::vector<double>& lambdas,
                                                 const Box& box, std::uint64_t seed,
                                                 int flow_steps = 256);

struct ScaledCovSensitivity {
    double max_ratio = 0.0;      // |[K^{x,l}-K^{x',l}]_11| / (c0 l^{g/2} d^{2+g}(x,x'))
    double refined_ratio = 0.0;  // at 2x samples
    bool stable = false;         // within 30%
};

// Enforces lambda in (0,1] and T/lambda <= 1 (configuration error otherwise).
ScaledCovSensitivity scaled_covariance_sensitivity(const ChainProblem& problem, double lambda,
                                                   double c0, int samples, std::uint64_t seed,
                                                   const Box& box, int flow_steps = 256);

}  // namespace schauder
