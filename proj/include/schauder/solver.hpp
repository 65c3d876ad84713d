#pragma once

// Frozen semigroup / Green kernel application, the perturbation terms
// (L - L~)u, the first-order Duhamel expansion run as a Picard fixed point on
// a space-time grid with per-point freezing (tau, xi) = (t, x), the
// regime-split diagnostic with its change-of-freezing discontinuity term, and
// backward time chaining.

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

#include "schauder/field.hpp"
#include "schauder/model.hpp"
#include "schauder/proxy.hpp"

namespace schauder {

// int p(t,s,x,y) psi(y) dy by whitened tensor Gauss-Hermite.
double frozen_semigroup_apply(const FrozenProxy& proxy, const ScalarField& psi, double t,
                              double s, const Eigen::VectorXd& x, int gh_nodes = 20);

// int D^theta_x p(t,s,x,y) psi(y) dy, flattened tensor.
std::vector<double> frozen_semigroup_derivative(const FrozenProxy::GaussianSlice& slice,
                                                const std::vector<int>& slot_bases, int d,
                                                const Eigen::VectorXd& x, const ScalarField& psi,
                                                int gh_nodes = 20);

// int_{t1}^{t2} ds int p(t,s,x,y) f(s,y) dy; square-root clustering of the
// time nodes when t1 == t (integrands scale like (s-t)^{-1+gamma/2}).
double green_apply(const FrozenProxy& proxy, const SourceFn& f, double t, double t1, double t2,
                   const Eigen::VectorXd& x, int time_nodes = 16, int gh_nodes = 20);

struct PerturbationTerms {
    double delta1 = 0.0;                // <F_1(s,y)-F_1(s,th), D_{y_1}u> + 1/2 Tr((a-a)D^2u)
    std::vector<double> delta_i;        // levels 2..n: <Delta_{i,F}, D_{y_i}u>
    double total() const {
        double acc = delta1;
        for (double v : delta_i) acc += v;
        return acc;
    }
};

// Derivative bundle of one Picard iterate (grid finite differences).
struct FieldDerivatives {
    std::vector<SampledField> d1;        // D over block-1 coordinates
    std::vector<SampledField> d2;        // block-1 Hessian, row-major d x d
    std::vector<SampledField> d_deg;     // D over coordinates of blocks >= 2
};

FieldDerivatives build_field_derivatives(const SampledField& u, const ChainDims& dims);

PerturbationTerms perturbation_residual(const ChainProblem& problem, const FrozenProxy& proxy,
                                        const SampledField& u_field,
                                        const FieldDerivatives& derivs, double s,
                                        const Eigen::VectorXd& y);

// Convenience overload building the derivative bundle on the fly.
PerturbationTerms perturbation_residual(const ChainProblem& problem, const FrozenProxy& proxy,
                                        const SampledField& u_field, double s,
                                        const Eigen::VectorXd& y);

struct SolverGrid {
    double t_lo = 0.0;
    double t_hi = 1.0;  // must equal the problem horizon
    int time_points = 5;
    Eigen::VectorXd x_lo, x_hi;
    std::vector<int> points_per_coord;
};

struct SolverOptions {
    int flow_steps = 256;
    int time_quad = 16;   // remainder / Green time nodes
    int gh_nodes = 12;    // per dimension
    int cov_quad = 24;
    double tol = 1e-9;
    int max_iter = 12;
    int threads = 0;      // 0 = SCHAUDER_LAB_THREADS or hardware
    bool skip_assumption_checks = false;
};

struct SolveResult {
    SampledField u;
    std::vector<double> sup_changes;  // one per Picard sweep
    int iterations = 0;
    bool converged = false;
    long extrapolation_count = 0;
};

class SolverDivergence : public std::runtime_error {
public:
    SolverDivergence(std::string msg, std::vector<double> history)
        : std::runtime_error(std::move(msg)), sup_changes(std::move(history)) {}
    std::vector<double> sup_changes;
};

SolveResult parametrix_solve(const ChainProblem& problem, const SolverGrid& grid,
                             const SolverOptions& options);

struct RegimeSplitReport {
    double t0 = 0.0;
    double d_gamma = 0.0;           // d^gamma(x, x')
    double off_diag = 0.0;          // remainder difference on [t, t0], freezings (x, x')
    double diag = 0.0;              // remainder difference on [t0, T], common freezing x
    double discontinuity = 0.0;     // P~^(t,x') u(t0, x') - P~^(t,x) u(t0, x')
    double discontinuity_d2 = 0.0;  // same with D^2_{x_1}
    double off_diag_ratio = 0.0;
    double diag_ratio = 0.0;
    double discontinuity_ratio = 0.0;     // discontinuity / d^gamma
    double discontinuity_d2_ratio = 0.0;  // d2 version / d^gamma
};

RegimeSplitReport regime_split_expand(const ChainProblem& problem, const SampledField& u_field,
                                      double t, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& x_prime, double c0,
                                      const SolverOptions& options);

struct ChainedSolveResult {
    SampledField u;                       // merged over all segments
    std::vector<SolveResult> segments;    // backward order (last segment first)
};

ChainedSolveResult time_chained_solve(const ChainProblem& problem, int segments,
                                      const SolverGrid& grid, const SolverOptions& options);

int resolve_thread_count(int requested);

}  // namespace schauder
