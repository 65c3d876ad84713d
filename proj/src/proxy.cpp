#include "schauder/proxy.hpp"

#include <cmath>
#include <stdexcept>

#include "schauder/quadrature.hpp"

namespace schauder {

namespace {

template <class State, class Rhs>
void rk4_dense(double t0, double t1, int steps, State y0, const Rhs& rhs,
               std::vector<double>& times, std::vector<State>& states,
               std::vector<State>& derivs) {
    if (steps < 1) throw std::invalid_argument("rk4: steps must be >= 1");
    const double h = (t1 - t0) / steps;
    times.clear();
    states.clear();
    derivs.clear();
    times.reserve(static_cast<size_t>(steps) + 1);
    states.reserve(static_cast<size_t>(steps) + 1);
    derivs.reserve(static_cast<size_t>(steps) + 1);
    State y = y0;
    double t = t0;
    times.push_back(t);
    states.push_back(y);
    derivs.push_back(rhs(t, y));
    for (int k = 0; k < steps; ++k) {
        const State k1 = derivs.back();
        const State k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
        const State k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
        const State k4 = rhs(t + h, y + h * k3);
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = t0 + (k + 1) * h;
        times.push_back(t);
        states.push_back(y);
        derivs.push_back(rhs(t, y));
    }
}

template <class State>
State hermite_eval(const std::vector<double>& times, const std::vector<State>& states,
                   const std::vector<State>& derivs, double t) {
    const size_t m = times.size();
    if (m == 1) return states[0];
    const double t0 = times.front(), t1 = times.back();
    if (t <= t0) return states.front();
    if (t >= t1) return states.back();
    const double h = (t1 - t0) / static_cast<double>(m - 1);
    size_t k = static_cast<size_t>((t - t0) / h);
    if (k >= m - 1) k = m - 2;
    const double s = (t - times[k]) / (times[k + 1] - times[k]);
    const double hk = times[k + 1] - times[k];
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * states[k] + (s3 - 2 * s2 + s) * hk * derivs[k] +
           (-2 * s3 + 3 * s2) * states[k + 1] + (s3 - s2) * hk * derivs[k + 1];
}

}  // namespace

Eigen::VectorXd FlowPath::eval(double t) const { return hermite_eval(times, states, derivs, t); }

FlowPath solve_flow(const ChainProblem& problem, double tau, const Eigen::VectorXd& xi,
                    double t_end, int steps) {
    if (steps < 16) throw std::invalid_argument("solve_flow: steps must be >= 16");
    if (t_end < tau) throw std::invalid_argument("solve_flow: t_end < tau");
    FlowPath path;
    if (t_end == tau) {
        path.times = {tau};
        path.states = {xi};
        path.derivs = {problem.drift_full(tau, xi)};
        return path;
    }
    auto rhs = [&problem](double t, const Eigen::VectorXd& y) {
        return problem.drift_full(t, y);
    };
    rk4_dense(tau, t_end, steps, xi, rhs, path.times, path.states, path.derivs);
    return path;
}

FrozenProxy::FrozenProxy(const ChainProblem& problem, double tau, const Eigen::VectorXd& xi,
                         int steps)
    : problem_(&problem), tau_(tau), xi_(xi), steps_(steps) {
    const double T = problem.dims.horizon_T;
    if (tau < 0.0 || tau > T) throw std::invalid_argument("FrozenProxy: tau outside [0,T]");
    flow_path_ = solve_flow(problem, tau, xi, T, steps);
    if (tau == T) {
        rtimes_ = {tau};
        rstates_ = {Eigen::MatrixXd::Identity(problem.dims.nd(), problem.dims.nd())};
        rderivs_ = {problem.drift_subdiagonal_jacobian(tau, xi) * rstates_[0]};
        return;
    }
    auto rhs = [this](double v, const Eigen::MatrixXd& R) {
        return (problem_->drift_subdiagonal_jacobian(v, flow_path_.eval(v)) * R).eval();
    };
    rk4_dense(tau, T, steps,
              Eigen::MatrixXd::Identity(problem.dims.nd(), problem.dims.nd()).eval(), rhs,
              rtimes_, rstates_, rderivs_);
}

Eigen::VectorXd FrozenProxy::flow(double v) const { return flow_path_.eval(v); }

Eigen::MatrixXd FrozenProxy::resolvent_from_tau(double v) const {
    return hermite_eval(rtimes_, rstates_, rderivs_, v);
}

Eigen::MatrixXd FrozenProxy::resolvent(double t, double s) const {
    if (t < tau_ - 1e-12 || s < t)
        throw std::invalid_argument("resolvent: requires tau <= t <= s");
    if (s == t) return Eigen::MatrixXd::Identity(problem_->dims.nd(), problem_->dims.nd());
    const Eigen::MatrixXd Rs = resolvent_from_tau(s);
    const Eigen::MatrixXd Rt = resolvent_from_tau(t);
    return Rs * Rt.partialPivLu().inverse();
}

Eigen::MatrixXd FrozenProxy::covariance(double t, double s, int quad_nodes) const {
    if (!(s > t)) throw std::invalid_argument("covariance: requires s > t");
    const int nd = problem_->dims.nd();
    const int d = problem_->dims.d;
    const QuadratureRule rule = gauss_legendre(quad_nodes, t, s);
    const Eigen::MatrixXd Rs = resolvent_from_tau(s);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nd, nd);
    for (int q = 0; q < rule.nodes.size(); ++q) {
        const double u = rule.nodes[q];
        const Eigen::VectorXd theta_u = flow_path_.eval(u);
        // R(s,u) restricted to the first block column: (R(s,tau) R(u,tau)^{-1}) B.
        const Eigen::MatrixXd Rsu = Rs * resolvent_from_tau(u).partialPivLu().inverse();
        const Eigen::MatrixXd col = Rsu.leftCols(d);  // R(s,u) B
        const Eigen::MatrixXd a = problem_->diffusion_a(u, theta_u);
        K += rule.weights[q] * col * a * col.transpose();
    }
    return 0.5 * (K + K.transpose());
}

std::pair<double, double> FrozenProxy::gsp_diagnostic(double t, double s) const {
    const Eigen::MatrixXd K = covariance(t, s);
    const Eigen::VectorXd inv_scale =
        scale_matrix_diagonal(s - t, problem_->dims, /*inverse=*/true);
    const Eigen::MatrixXd M =
        (s - t) * inv_scale.asDiagonal() * K * inv_scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw std::runtime_error("gsp_diagnostic: rescaled covariance is not PSD");
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

Eigen::VectorXd FrozenProxy::mean(double t, double s, const Eigen::VectorXd& x) const {
    if (s < t) throw std::invalid_argument("mean: requires t <= s");
    if (s == t) return x;
    // m and theta satisfy the same affine ODE; their difference is propagated
    // by the resolvent, so m_{s,t}(x) = theta_s + R(s,t)(x - theta_t).
    return flow_path_.eval(s) + resolvent(t, s) * (x - flow_path_.eval(t));
}

double FrozenProxy::GaussianSlice::density(const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& y) const {
    const Eigen::VectorXd e = mean(x) - y;
    const Eigen::VectorXd z = chol.matrixL().solve(e);
    return std::exp(log_norm - 0.5 * z.squaredNorm());
}

Eigen::VectorXd FrozenProxy::GaussianSlice::log_gradient(const Eigen::VectorXd& x,
                                                         const Eigen::VectorXd& y) const {
    const Eigen::VectorXd e = mean(x) - y;
    return -resolvent.transpose() * chol.solve(e);
}

Eigen::MatrixXd FrozenProxy::GaussianSlice::log_hessian() const {
    return -resolvent.transpose() * chol.solve(resolvent);
}

FrozenProxy::GaussianSlice FrozenProxy::slice(double t, double s, int quad_nodes) const {
    if (!(s > t)) throw std::invalid_argument("slice: requires s > t");
    GaussianSlice g;
    g.t = t;
    g.s = s;
    g.mean_base = flow_path_.eval(s);
    g.flow_t = flow_path_.eval(t);
    g.resolvent = resolvent(t, s);
    g.covariance = covariance(t, s, quad_nodes);
    Eigen::MatrixXd K = g.covariance;
    g.chol.compute(K);
    if (g.chol.info() != Eigen::Success) {
        K += (1e-12 * K.trace()) * Eigen::MatrixXd::Identity(K.rows(), K.cols());
        g.chol.compute(K);
        if (g.chol.info() != Eigen::Success)
            throw std::runtime_error("FrozenProxy: covariance not positive definite");
    }
    double log_det = 0.0;
    const auto& L = g.chol.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i) log_det += 2.0 * std::log(L(i, i));
    const int nd = problem_->dims.nd();
    g.log_norm = -0.5 * nd * std::log(2.0 * M_PI) - 0.5 * log_det;
    return g;
}

std::vector<int> derivative_slots(const std::vector<int>& theta, const ChainDims& dims) {
    if (static_cast<int>(theta.size()) != dims.n)
        throw std::invalid_argument("derivative multi-index must have one entry per block");
    std::vector<int> slots;
    int total = 0;
    for (int i = 0; i < dims.n; ++i) {
        if (theta[static_cast<size_t>(i)] < 0)
            throw std::invalid_argument("derivative multi-index entries must be >= 0");
        total += theta[static_cast<size_t>(i)];
        for (int r = 0; r < theta[static_cast<size_t>(i)]; ++r) slots.push_back(i * dims.d);
    }
    if (total > 3) throw std::invalid_argument("derivative order above 3 is unsupported");
    return slots;
}

namespace {

std::vector<double> derivative_tensor_impl(const Eigen::VectorXd& g, const Eigen::MatrixXd& H,
                                           double p, const std::vector<int>& slot_bases, int d) {
    const int k = static_cast<int>(slot_bases.size());
    std::vector<double> out;
    if (k == 0) {
        out.push_back(p);
        return out;
    }
    std::vector<int> idx(static_cast<size_t>(k), 0);
    const auto coord = [&](int slot) {
        return slot_bases[static_cast<size_t>(slot)] + idx[static_cast<size_t>(slot)];
    };
    while (true) {
        double v = 0.0;
        if (k == 1) {
            v = g[coord(0)];
        } else if (k == 2) {
            v = g[coord(0)] * g[coord(1)] + H(coord(0), coord(1));
        } else {
            const int a = coord(0), b = coord(1), c = coord(2);
            v = g[a] * g[b] * g[c] + g[a] * H(b, c) + g[b] * H(a, c) + g[c] * H(a, b);
        }
        out.push_back(p * v);
        int slot = k - 1;
        while (slot >= 0) {
            if (++idx[static_cast<size_t>(slot)] < d) break;
            idx[static_cast<size_t>(slot)] = 0;
            --slot;
        }
        if (slot < 0) break;
    }
    return out;
}

}  // namespace

std::vector<double> gaussian_derivative_tensor(const FrozenProxy::GaussianSlice& slice,
                                               const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                               const std::vector<int>& slot_bases, int d) {
    const double p = slice.density(x, y);
    const Eigen::VectorXd grad = slice.log_gradient(x, y);
    const Eigen::MatrixXd hess = slice.log_hessian();
    return derivative_tensor_impl(grad, hess, p, slot_bases, d);
}

std::vector<double> gaussian_derivative_weights(const FrozenProxy::GaussianSlice& slice,
                                                const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                                const std::vector<int>& slot_bases, int d) {
    const Eigen::VectorXd grad = slice.log_gradient(x, y);
    const Eigen::MatrixXd hess = slice.log_hessian();
    return derivative_tensor_impl(grad, hess, 1.0, slot_bases, d);
}

std::vector<double> FrozenProxy::density_derivative(double t, double s, const Eigen::VectorXd& x,
                                                    const Eigen::VectorXd& y,
                                                    const std::vector<int>& theta) const {
    const GaussianSlice g = slice(t, s);
    const std::vector<int> slots = derivative_slots(theta, problem_->dims);
    const double p = g.density(x, y);
    const Eigen::VectorXd grad = g.log_gradient(x, y);
    const Eigen::MatrixXd hess = g.log_hessian();
    return derivative_tensor_impl(grad, hess, p, slots, problem_->dims.d);
}

double FrozenProxy::density(double t, double s, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y) const {
    return slice(t, s).density(x, y);
}

std::vector<double> FrozenProxy::moment_identity_check(double t, double s,
                                                       const Eigen::VectorXd& x, int gh_nodes,
                                                       const Eigen::MatrixXd& M_in) const {
    const int d = problem_->dims.d;
    const int nd = problem_->dims.nd();
    const int n = problem_->dims.n;
    const Eigen::MatrixXd M =
        (M_in.size() == 0) ? Eigen::MatrixXd::Identity(d, d).eval() : M_in;
    const GaussianSlice g = slice(t, s);
    (void)x;  // the identities are x-free: the integrand depends on y - m(x) only
    const Eigen::MatrixXd L = g.chol.matrixL();
    const Eigen::MatrixXd H = g.log_hessian();
    const QuadratureRule rule = gauss_hermite(gh_nodes);
    const double norm = std::pow(M_PI, -0.5 * nd);

    // E[.] accumulators: 1 (d x d), 2 (d^3), 3 (n d^4), 4 (d x d), 5 (n d^3).
    Eigen::MatrixXd acc1 = Eigen::MatrixXd::Zero(d, d);
    std::vector<double> acc2(static_cast<size_t>(d) * d * d, 0.0);
    std::vector<double> acc3(static_cast<size_t>(n) * d * d * d * d, 0.0);
    Eigen::MatrixXd acc4 = Eigen::MatrixXd::Zero(d, d);
    std::vector<double> acc5(static_cast<size_t>(n) * d * d * d, 0.0);

    Eigen::VectorXd z(nd);
    for_each_tensor_index(nd, gh_nodes, [&](const std::vector<int>& idx) {
        double w = norm;
        for (int c = 0; c < nd; ++c) {
            w *= rule.weights[idx[static_cast<size_t>(c)]];
            z[c] = M_SQRT2 * rule.nodes[idx[static_cast<size_t>(c)]];
        }
        const Eigen::VectorXd dev = L * z;  // y - m
        const Eigen::VectorXd e1 = dev.segment(0, d);
        const Eigen::VectorXd grad = g.resolvent.transpose() * g.chol.solve(dev);
        const double trM = e1.dot(M * e1);
        acc1 += w * e1 * e1.transpose();
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                const double w2 = grad[a] * grad[b] + H(a, b);
                for (int c = 0; c < d; ++c)
                    acc2[(static_cast<size_t>(a) * d + b) * d + c] += w * w2 * e1[c];
                acc4(a, b) += w * w2 * trM;
                for (int k = 0; k < n; ++k)
                    for (int c = 0; c < d; ++c) {
                        const int gc = k * d + c;
                        const double w3 = grad[a] * grad[b] * grad[gc] + grad[a] * H(b, gc) +
                                          grad[b] * H(a, gc) + grad[gc] * H(a, b);
                        for (int e = 0; e < d; ++e)
                            acc3[((static_cast<size_t>(k) * d + a) * d + b) * d * d +
                                 static_cast<size_t>(c) * d + e] += w * w3 * dev[e];
                        acc5[((static_cast<size_t>(k) * d + a) * d + b) * d + c] +=
                            w * w3 * trM;
                    }
            }
    });

    std::vector<double> residuals(5, 0.0);
    residuals[0] = (acc1 - g.covariance.block(0, 0, d, d)).cwiseAbs().maxCoeff();
    for (double v : acc2) residuals[1] = std::max(residuals[1], std::abs(v));
    for (double v : acc3) residuals[2] = std::max(residuals[2], std::abs(v));
    residuals[3] = (acc4 - 2.0 * M).cwiseAbs().maxCoeff();
    for (double v : acc5) residuals[4] = std::max(residuals[4], std::abs(v));
    return residuals;
}

double FrozenProxy::density_mass(double t, double s, const Eigen::VectorXd& x, double sigmas,
                                 int nodes_per_dim) const {
    const int nd = problem_->dims.nd();
    const GaussianSlice g = slice(t, s);
    const Eigen::VectorXd m = g.mean(x);
    const Eigen::VectorXd sd = g.covariance.diagonal().cwiseSqrt();
    const int nodes = (nd <= 2) ? nodes_per_dim : (nd == 3 ? 32 : 16);
    std::vector<QuadratureRule> rules;
    for (int c = 0; c < nd; ++c)
        rules.push_back(gauss_legendre(nodes, m[c] - sigmas * sd[c], m[c] + sigmas * sd[c]));
    double acc = 0.0;
    Eigen::VectorXd y(nd);
    for_each_tensor_index(nd, nodes, [&](const std::vector<int>& idx) {
        double w = 1.0;
        for (int c = 0; c < nd; ++c) {
            y[c] = rules[static_cast<size_t>(c)].nodes[idx[static_cast<size_t>(c)]];
            w *= rules[static_cast<size_t>(c)].weights[idx[static_cast<size_t>(c)]];
        }
        acc += w * g.density(x, y);
    });
    return acc;
}

}  // namespace schauder
