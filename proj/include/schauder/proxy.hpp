#pragma once

// Frozen Gaussian proxy for a freezing pair (tau, xi): deterministic flow
// theta, resolvent R of the subdiagonal linearization, covariance
// K_{s,t} = int_t^s R(s,u) B a(u,theta_u) B* R(s,u)* du, affine mean
// m_{s,t}(x) = theta_s + R(s,t)(x - theta_t), and the Gaussian density with
// closed-form spatial derivatives up to order 3.

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "schauder/model.hpp"

namespace schauder {

// Dense fixed-step RK4 output with cubic Hermite interpolation.
struct FlowPath {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> derivs;

    double t_begin() const { return times.front(); }
    double t_end() const { return times.back(); }
    Eigen::VectorXd eval(double t) const;
};

FlowPath solve_flow(const ChainProblem& problem, double tau, const Eigen::VectorXd& xi,
                    double t_end, int steps);

class FrozenProxy {
public:
    FrozenProxy(const ChainProblem& problem, double tau, const Eigen::VectorXd& xi,
                int steps = 256);

    const ChainProblem& problem() const { return *problem_; }
    double tau() const { return tau_; }
    const Eigen::VectorXd& xi() const { return xi_; }

    // theta_{v,tau}(xi)
    Eigen::VectorXd flow(double v) const;

    // R(s,t) for tau <= t <= s <= T, via the propagator identity
    // R(s,t) = R(s,tau) R(t,tau)^{-1}; block lower-triangular, det = 1.
    Eigen::MatrixXd resolvent(double t, double s) const;

    Eigen::MatrixXd covariance(double t, double s, int quad_nodes = 32) const;

    // Eigenvalue range of (s-t) T_{s-t}^{-1} K T_{s-t}^{-1}.
    std::pair<double, double> gsp_diagnostic(double t, double s) const;

    Eigen::VectorXd mean(double t, double s, const Eigen::VectorXd& x) const;

    double density(double t, double s, const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

    // Flattened derivative tensor D^theta p with theta a per-block multi-index,
    // |theta| <= 3; slots ordered block-major, coordinates row-major.
    std::vector<double> density_derivative(double t, double s, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& y,
                                           const std::vector<int>& theta) const;

    // Factorized Gaussian pieces shared by the solver; immutable per (t,s).
    struct GaussianSlice {
        double t = 0.0, s = 0.0;
        Eigen::VectorXd mean_base;  // theta_s
        Eigen::VectorXd flow_t;     // theta_t
        Eigen::MatrixXd resolvent;  // R(s,t)
        Eigen::MatrixXd covariance;
        Eigen::LLT<Eigen::MatrixXd> chol;
        double log_norm = 0.0;  // -nd/2 log(2 pi) - 1/2 log det K

        Eigen::VectorXd mean(const Eigen::VectorXd& x) const {
            return mean_base + resolvent * (x - flow_t);
        }
        double density(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
        // grad_x log p and (constant) hess_x log p
        Eigen::VectorXd log_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
        Eigen::MatrixXd log_hessian() const;
    };

    GaussianSlice slice(double t, double s, int quad_nodes = 32) const;

    // Max-abs residuals of the five moment-cancellation identities, evaluated
    // by whitened tensor Gauss-Hermite with gh_nodes points per dimension.
    std::vector<double> moment_identity_check(double t, double s, const Eigen::VectorXd& x,
                                              int gh_nodes = 20,
                                              const Eigen::MatrixXd& M = Eigen::MatrixXd()) const;

    // int p(t,s,x,y) dy over a tensor Gauss-Legendre box of +-sigmas block
    // standard deviations around the mean; independent of the whitening route.
    double density_mass(double t, double s, const Eigen::VectorXd& x, double sigmas = 8.0,
                        int nodes_per_dim = 64) const;

private:
    const ChainProblem* problem_;
    double tau_;
    Eigen::VectorXd xi_;
    int steps_;
    FlowPath flow_path_;
    // resolvent path R(v, tau) stored like a flow (entries interpolated).
    std::vector<double> rtimes_;
    std::vector<Eigen::MatrixXd> rstates_;
    std::vector<Eigen::MatrixXd> rderivs_;

    Eigen::MatrixXd resolvent_from_tau(double v) const;
};

// Derivative tensor of a Gaussian slice at (x, y): slot_bases lists the first
// coordinate of the block each derivative acts on, d is the block width.
std::vector<double> gaussian_derivative_tensor(const FrozenProxy::GaussianSlice& slice,
                                               const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                               const std::vector<int>& slot_bases, int d);

// Same tensor divided by the density value (the polynomial Hermite weights);
// used to turn density-derivative integrals into plain Gaussian expectations.
std::vector<double> gaussian_derivative_weights(const FrozenProxy::GaussianSlice& slice,
                                                const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                                const std::vector<int>& slot_bases, int d);

// Expands a per-block multi-index into per-slot block base coordinates.
std::vector<int> derivative_slots(const std::vector<int>& theta, const ChainDims& dims);

}  // namespace schauder
