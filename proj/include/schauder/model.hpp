#pragma once

// Chain problems: coefficient fields F_1..F_n with the subdiagonal structure,
// diffusion a = sigma sigma^* acting on the first block, source and terminal
// data. Includes the built-in catalog, the (UE)/(H)/(S) assumption checks and
// spatial mollification by a separable compactly supported bump.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "schauder/anisotropy.hpp"
#include "schauder/holder.hpp"

namespace schauder {

using DriftFn = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
using MatrixFn = std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)>;
using SourceFn = std::function<double(double, const Eigen::VectorXd&)>;
using TerminalFn = std::function<double(const Eigen::VectorXd&)>;

struct DriftComponent {
    DriftFn eval;                 // F_i(t, x) -> R^d
    std::vector<int> depends_on;  // global scalar coordinates F_i actually reads
};

// Terminal data with an optional quadratic form (Q, c, c0) so linear-chain
// oracles can integrate it in closed form.
struct TerminalData {
    TerminalFn eval;
    std::vector<int> depends_on;
    bool is_polynomial = false;
    Eigen::MatrixXd poly_Q;  // g(x) = x^T Q x + <c, x> + c0 when is_polynomial
    Eigen::VectorXd poly_c;
    double poly_c0 = 0.0;
};

struct SourceData {
    SourceFn eval;
    std::vector<int> depends_on;
};

struct ChainProblem {
    ChainDims dims;
    std::vector<DriftComponent> drift;  // size n
    MatrixFn diffusion_a;               // d x d, symmetric positive definite
    std::vector<int> a_depends_on;
    MatrixFn sigma;                     // square root of a
    SourceData source_f;
    TerminalData terminal_g;
    std::string catalog_id;

    bool drift_is_affine = false;  // F(t,x) = affine_A x + affine_b
    Eigen::MatrixXd affine_A;
    Eigen::VectorXd affine_b;
    bool a_is_constant = false;

    Eigen::VectorXd drift_full(double t, const Eigen::VectorXd& x) const;
    // Subdiagonal Jacobian blocks D_{x_{i-1}} F_i assembled into an nd x nd
    // matrix (zero elsewhere); finite differences with step 1e-5 (1 + |x|).
    Eigen::MatrixXd drift_subdiagonal_jacobian(double t, const Eigen::VectorXd& x) const;
};

// Catalog construction. Parameters not present fall back to documented
// defaults; unknown names throw.
struct CatalogParams {
    double amp = 0.2;          // generic perturbation amplitude
    double rough_exponent = 0; // 0 -> use the level-specific default
    double a_amp = 0.0;        // diffusion roughness amplitude
    double sawtooth_period = 1.0;
    int rough_levels = 16;  // Weierstrass truncation depth for rough entries
    std::uint64_t phase_seed = 17;
};

ChainProblem make_catalog_problem(const std::string& name, const ChainDims& dims,
                                  const CatalogParams& params = {});

std::vector<std::string> catalog_names();

// Truncated Weierstrass-type sum: rho-Holder at every point down to scale
// 2^{-levels}; used for the rough catalog coefficients.
double weierstrass(double x, double rho, int levels, std::uint64_t phase_seed);

// sigma from a by symmetric eigendecomposition square root.
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& a);

// --- Assumption checks ------------------------------------------------------

struct UeReport {
    double kappa_hat = 1.0;
    double min_eigen = 0.0;
    double max_eigen = 0.0;
    bool pass = false;
    bool bounded_violation = false;  // kappa_hat exceeded the configured cap
};

UeReport check_uniform_ellipticity(const ChainProblem& problem, const Box& box, int samples,
                                   std::uint64_t seed, double kappa_cap = 1e4);

struct HormanderReport {
    // Convex sets E_{i-1} of the weak Hormander condition are proxied by a
    // floor on the smallest singular value of D_{x_{i-1}} F_i.
    std::vector<double> min_singular_values;  // levels 2..n
    double floor = 1e-6;
    bool pass = false;
    std::string note;
};

HormanderReport check_hormander(const ChainProblem& problem, const Box& box, int samples,
                                std::uint64_t seed, double floor = 1e-6);

struct DriftModulus {
    int level = 0;     // i
    int variable = 0;  // j in [(i-1) v 1, n]
    double exponent = 0.0;
    double seminorm = 0.0;
    double refined_seminorm = 0.0;  // at 2x samples
    bool growing = false;           // > 10% growth under refinement
};

struct DriftRegularityReport {
    std::vector<DriftModulus> moduli;
    bool all_stable = false;
};

DriftRegularityReport check_drift_regularity(const ChainProblem& problem, const Box& box,
                                             int samples, std::uint64_t seed);

struct AssumptionReport {
    UeReport ue;
    HormanderReport hormander;
    DriftRegularityReport drift;
    bool pass() const { return ue.pass && hormander.pass; }
};

AssumptionReport check_assumptions(const ChainProblem& problem, const Box& box, int samples,
                                   std::uint64_t seed);

// --- Mollification ----------------------------------------------------------

// phi_m(z) = m^{nd} phi(m z) with phi a product over scalar coordinates of the
// normalized bump c exp(-1/(1-z^2)) on [-1,1]; support is the unit sup-norm
// ball, which keeps the kernel separable across blocks.
struct Mollifier {
    int m = 8;
    double bump(double z) const;          // normalized 1-D profile
    static double bump_normalization();   // 1 / int exp(-1/(1-z^2))
};

struct MollifyOptions {
    int quad_points = 8;        // per convolved coordinate
    bool mollify_data = false;  // also convolve f and g
    long budget = 200000;       // max tensor evaluations per call
};

ChainProblem mollify(const ChainProblem& problem, const Mollifier& mollifier,
                     const MollifyOptions& options = {});

// sigma sigma^* - a residual and structural independence of F_i from blocks
// 1..i-2, sampled; used by tests and run_experiment.
struct ProblemValidation {
    double sigma_reconstruction_error = 0.0;
    double structure_violation = 0.0;
    bool pass = false;
};

ProblemValidation validate_problem(const ChainProblem& problem, const Box& box, int samples,
                                   std::uint64_t seed);

}  // namespace schauder
