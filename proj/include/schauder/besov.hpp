#pragma once

// Thermic (heat-kernel) characterization of negative-order Besov norms on 1-D
// sampled functions, the scalar Holder norm they pair with, and the decay
// profile of the degenerate perturbation terms Psi = d/dy_i (D^theta p x Delta_{i,F}).

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "schauder/model.hpp"
#include "schauder/proxy.hpp"

namespace schauder {

struct Sampled1d {
    double lo = 0.0;
    double hi = 0.0;
    Eigen::VectorXd values;

    int size() const { return static_cast<int>(values.size()); }
    double step() const { return (hi - lo) / (size() - 1); }
    double coord(int i) const { return lo + step() * i; }
    double l1_norm() const { return values.cwiseAbs().sum() * step(); }
    double sup_norm() const { return values.cwiseAbs().maxCoeff(); }
};

Sampled1d sample_function(const std::function<double(double)>& f, double lo, double hi, int n);

struct ThermicConfig {
    double alpha_tilde = 1.0;  // the norm is B_{1,1}^{-alpha_tilde}
    double v_min = 1e-6;
    int v_nodes = 64;          // log-spaced Simpson nodes on [v_min, 1]
    double lowpass_v0 = 1.0;   // Gaussian low-pass scale
    bool strict = false;       // promote boundary-decay warning to error
};

// Discrete convolution with the heat kernel N(0, v); kernel truncated at
// 8 sqrt(v) and renormalized to unit discrete mass so densities keep mass.
Sampled1d heat_convolve(const Sampled1d& f, double v, bool strict = false);

// Convolution with the derivative kernel d/dz h_v; evaluates h_v' * W which
// equals h_v * W' when W' exists and stands for it when it does not.
Sampled1d heat_convolve_derivative(const Sampled1d& w, double v);

struct ThermicNorm {
    double lowpass = 0.0;
    double tail = 0.0;
    double endpoint = 0.0;  // analytic [0, v_min] continuation, included in tail
    double total = 0.0;
    bool diverged = false;
};

ThermicNorm thermic_norm_neg(const Sampled1d& f, const ThermicConfig& cfg);

// Same quasi-norm for the distributional derivative of w (the Psi form):
// every convolution is moved onto the kernel.
ThermicNorm thermic_norm_neg_div(const Sampled1d& w, const ThermicConfig& cfg);

// C_b^alpha norm of a sampled scalar function, alpha non-integer in (0,3).
double holder_norm_scalar(const Sampled1d& f, double alpha_tilde);

struct PsiProfilePoint {
    double s = 0.0;
    double norm = 0.0;        // envelope-volume normalized slice norm
    double raw_norm = 0.0;    // thermic norm of the slice itself
    double envelope_volume = 0.0;
};

struct PsiProfile {
    std::vector<PsiProfilePoint> points;
    double slope = 0.0;            // log-log regression vs (s - t)
    double predicted_slope = 0.0;  // control-bound rate -(sum theta_j (j-1/2) - gamma/2)
    double saturated_slope = 0.0;  // rate the rough catalog actually attains,
                                   // -(sum theta_j (j-1/2) - gamma)
    bool all_zero = false;         // exact cancellation (linear drift)
    // The bound allows blow-up (s-t)^{predicted_slope}; it is verified when
    // the measured norm blows up no faster, i.e. slope >= predicted - tol.
    bool bound_verified() const { return all_zero || slope >= predicted_slope - 0.2; }
};

// Slice surrogate of the degenerate Besov control: other blocks pinned at
// theta_{s,t}(x), 1-D thermic norm in y_i, then multiplied by the off-block
// Gaussian envelope volume prod_{j != i} (2 pi (s-t)^{2j-1})^{d/2}. d = 1 only.
PsiProfile psi_besov_profile(const ChainProblem& problem, int level_i,
                             const std::vector<int>& theta, double t, const Eigen::VectorXd& x,
                             const std::vector<double>& s_values, const ThermicConfig& cfg,
                             int flow_steps = 256);

// beta_i = (2i-3)(2i-1)/(2i-3-gamma): split point (s-t)^{beta_i} of the
// thermic integral; splitting is a pure quadrature identity on the total.
double besov_split_exponent(int level_i, double gamma);

struct ThermicSplit {
    double below = 0.0;
    double above = 0.0;
};

// Tail split at v_split for the div-form norm; below + above must reproduce
// the unsplit tail.
ThermicSplit thermic_tail_split_div(const Sampled1d& w, const ThermicConfig& cfg,
                                    double v_split);

}  // namespace schauder
