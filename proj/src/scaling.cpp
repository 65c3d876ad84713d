#include "schauder/scaling.hpp"

#include <cmath>
#include <stdexcept>

#include "schauder/proxy.hpp"

namespace schauder {

Eigen::VectorXd scale_point(const Eigen::VectorXd& x, double lambda, const ChainDims& dims) {
    return scale_matrix_apply(lambda, x, dims) / std::sqrt(lambda);
}

ChainProblem rescale_problem(const ChainProblem& problem, double lambda) {
    if (!(lambda > 0.0)) throw std::domain_error("rescale_problem: lambda must be > 0");
    const ChainDims dims = problem.dims;
    ChainProblem out = problem;
    out.catalog_id = problem.catalog_id + "+lambda";

    for (int i = 1; i <= dims.n; ++i) {
        const DriftFn base = problem.drift[static_cast<size_t>(i - 1)].eval;
        const double factor = std::pow(lambda, 0.5 - i);
        out.drift[static_cast<size_t>(i - 1)].eval =
            [base, factor, lambda, dims](double t, const Eigen::VectorXd& x) {
                return (factor * base(t, scale_point(x, lambda, dims))).eval();
            };
    }
    {
        const MatrixFn base = problem.diffusion_a;
        out.diffusion_a = [base, lambda, dims](double t, const Eigen::VectorXd& x) {
            return ((1.0 / lambda) * base(t, scale_point(x, lambda, dims))).eval();
        };
        const MatrixFn sbase = problem.sigma;
        const double sfac = 1.0 / std::sqrt(lambda);
        out.sigma = [sbase, sfac, lambda, dims](double t, const Eigen::VectorXd& x) {
            return (sfac * sbase(t, scale_point(x, lambda, dims))).eval();
        };
    }
    {
        const SourceFn base = problem.source_f.eval;
        out.source_f.eval = [base, lambda, dims](double t, const Eigen::VectorXd& x) {
            return base(t, scale_point(x, lambda, dims));
        };
        const TerminalFn gbase = problem.terminal_g.eval;
        out.terminal_g.eval = [gbase, lambda, dims](const Eigen::VectorXd& x) {
            return gbase(scale_point(x, lambda, dims));
        };
        out.terminal_g.is_polynomial = false;
    }
    if (problem.drift_is_affine) {
        const Eigen::VectorXd diag = scale_matrix_diagonal(lambda, dims);
        const Eigen::VectorXd diag_inv = scale_matrix_diagonal(lambda, dims, true);
        const double rt = std::sqrt(lambda);
        out.affine_A = (rt * diag_inv).asDiagonal() * problem.affine_A *
                       (diag / rt).asDiagonal();
        out.affine_b = rt * diag_inv.cwiseProduct(problem.affine_b);
    }
    return out;
}

DensityScalingResult density_scaling_check(const ChainProblem& problem, double lambda,
                                           int sample_points, std::uint64_t seed, const Box& box,
                                           int flow_steps) {
    if (!(lambda > 0.0)) throw std::domain_error("density_scaling_check: lambda must be > 0");
    const ChainDims& dims = problem.dims;
    const double T = dims.horizon_T;
    const ChainProblem scaled = rescale_problem(problem, lambda);
    const double dens_factor = std::pow(lambda, 0.5 * dims.n * dims.n * dims.d);

    DensityScalingResult res;
    res.samples = sample_points;
    WeylSampler sampler(dims.nd() * 2 + 2, seed);
    for (int k = 0; k < sample_points; ++k) {
        const Eigen::VectorXd u = sampler.point(static_cast<std::uint64_t>(k));
        const double t = 0.45 * T * u[0];
        const double s = t + (0.1 + 0.85 * u[1]) * (T - t);
        const Eigen::VectorXd x = box.map_unit(u.segment(2, dims.nd()));
        FrozenProxy scaled_proxy(scaled, t, x, flow_steps);
        const FrozenProxy::GaussianSlice slice = scaled_proxy.slice(t, s);
        // Probe y where the scaled density carries mass.
        const Eigen::VectorXd z =
            (u.segment(2 + dims.nd(), dims.nd()).array() * 4.0 - 2.0).matrix();
        const Eigen::VectorXd y = slice.mean(x) + slice.chol.matrixL() * z;
        const double lhs = slice.density(x, y);

        FrozenProxy base_proxy(problem, t, scale_point(x, lambda, dims), flow_steps);
        const double rhs = dens_factor * base_proxy.density(t, s, scale_point(x, lambda, dims),
                                                            scale_point(y, lambda, dims));
        const double rel = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
        res.max_relative_residual = std::max(res.max_relative_residual, rel);
    }
    return res;
}

DerivativeScalingResult derivative_scaling_slope(const ChainProblem& problem,
                                                 const std::vector<int>& theta,
                                                 const std::vector<double>& lambdas,
                                                 const Box& box, std::uint64_t seed,
                                                 int flow_steps) {
    const ChainDims& dims = problem.dims;
    const double T = dims.horizon_T;
    WeylSampler sampler(2 * dims.nd(), seed);
    const Eigen::VectorXd u = sampler.point(0);
    const Eigen::VectorXd x = box.map_unit(u.segment(0, dims.nd()));
    const Eigen::VectorXd z =
        (u.segment(dims.nd(), dims.nd()).array() * 2.0 - 1.0).matrix();
    const double t = 0.1 * T, s = 0.6 * T;
    const std::vector<int> slots = derivative_slots(theta, dims);

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (double lambda : lambdas) {
        const ChainProblem scaled = rescale_problem(problem, lambda);
        FrozenProxy proxy(scaled, t, x, flow_steps);
        const FrozenProxy::GaussianSlice slice = proxy.slice(t, s);
        const Eigen::VectorXd y = slice.mean(x) + slice.chol.matrixL() * z;
        const std::vector<double> tensor = gaussian_derivative_tensor(slice, x, y, slots, dims.d);
        double mag = 0.0;
        for (double v : tensor) mag = std::max(mag, std::abs(v));
        if (mag <= 0.0) continue;
        const double lx = std::log(lambda), ly = std::log(mag);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    DerivativeScalingResult out;
    double tw = 0.0;
    for (int j = 0; j < dims.n; ++j) tw += theta[static_cast<size_t>(j)] * (j + 0.5);
    out.predicted = 0.5 * dims.n * dims.n * dims.d + tw;
    if (m >= 2) out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return out;
}

ScaledCovSensitivity scaled_covariance_sensitivity(const ChainProblem& problem, double lambda,
                                                   double c0, int samples, std::uint64_t seed,
                                                   const Box& box, int flow_steps) {
    const ChainDims& dims = problem.dims;
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw std::invalid_argument("scaled_covariance_sensitivity: lambda must lie in (0,1]");
    if (dims.horizon_T / lambda > 1.0 + 1e-12)
        throw std::invalid_argument("scaled_covariance_sensitivity: requires T/lambda <= 1");
    if (!(c0 > 0.0 && c0 <= 1.0))
        throw std::invalid_argument("scaled_covariance_sensitivity: c0 must lie in (0,1]");
    const ChainProblem scaled = rescale_problem(problem, lambda);

    auto run = [&](int nsamp) {
        WeylSampler sampler(2 * dims.nd() + 1, seed);
        double worst = 0.0;
        for (int k = 0; k < nsamp; ++k) {
            const Eigen::VectorXd u = sampler.point(static_cast<std::uint64_t>(k));
            const double t = 0.25 * dims.horizon_T * u[0];
            const Eigen::VectorXd x = box.map_unit(u.segment(1, dims.nd()));
            const Eigen::VectorXd xp = box.map_unit(u.segment(1 + dims.nd(), dims.nd()));
            const double dist = quasi_distance(x, xp, dims);
            if (dist < 1e-8) continue;
            const double v = std::min(t + c0 * lambda * dist * dist, dims.horizon_T);
            if (v <= t + 1e-12) continue;
            FrozenProxy proxy_x(scaled, t, x, flow_steps);
            FrozenProxy proxy_xp(scaled, t, xp, flow_steps);
            const double k11_x = proxy_x.covariance(t, v)(0, 0);
            const double k11_xp = proxy_xp.covariance(t, v)(0, 0);
            const double denom =
                c0 * std::pow(lambda, 0.5 * dims.gamma) * std::pow(dist, 2.0 + dims.gamma);
            worst = std::max(worst, std::abs(k11_x - k11_xp) / denom);
        }
        return worst;
    };
    ScaledCovSensitivity out;
    out.max_ratio = run(samples);
    out.refined_ratio = run(2 * samples);
    const double lo = std::min(out.max_ratio, out.refined_ratio);
    const double hi = std::max(out.max_ratio, out.refined_ratio);
    out.stable = (hi == 0.0) || (hi <= 1.3 * std::max(lo, 1e-300));
    return out;
}

}  // namespace schauder
