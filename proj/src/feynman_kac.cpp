#include "schauder/feynman_kac.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "schauder/proxy.hpp"
#include "schauder/solver.hpp"
#include "schauder/util.hpp"

namespace schauder {

double gaussian_increment(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                          std::uint64_t component) {
    const std::uint64_t base =
        splitmix64(seed ^ splitmix64(path * 0x9e3779b97f4a7c15ULL + step));
    const double u1 = counter_to_unit(base + 2 * component);
    const double u2 = counter_to_unit(base + 2 * component + 1);
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
}

namespace {

// One Euler path; returns the endpoint and accumulates the source integral.
Eigen::VectorXd euler_path(const ChainProblem& problem, double t, const Eigen::VectorXd& x,
                           double s, int steps, std::uint64_t seed, std::uint64_t stream,
                           double sign, double* source_acc) {
    const int d = problem.dims.d;
    const double dt = (s - t) / steps;
    const double sq_dt = std::sqrt(dt);
    Eigen::VectorXd state = x;
    Eigen::VectorXd noise(d);
    for (int k = 0; k < steps; ++k) {
        const double tk = t + dt * k;
        if (source_acc) *source_acc += problem.source_f.eval(tk, state) * dt;
        const Eigen::VectorXd drift = problem.drift_full(tk, state);
        const Eigen::MatrixXd sig = problem.sigma(tk, state);
        for (int c = 0; c < d; ++c)
            noise[c] = sign * gaussian_increment(seed, stream, static_cast<std::uint64_t>(k),
                                                 static_cast<std::uint64_t>(c));
        state += drift * dt;
        state.segment(0, d) += sig * (sq_dt * noise);
    }
    return state;
}

template <class Fn>
void run_paths(long paths, int threads, Fn&& fn) {
    if (threads <= 1 || paths < 2) {
        for (long p = 0; p < paths; ++p) fn(p);
        return;
    }
    std::vector<std::thread> pool;
    const long chunk = (paths + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        const long lo = w * chunk;
        const long hi = std::min(paths, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (long p = lo; p < hi; ++p) fn(p);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

Eigen::MatrixXd simulate_chain(const ChainProblem& problem, double t, const Eigen::VectorXd& x,
                               double s, const McConfig& cfg) {
    if (!(s > t)) throw std::invalid_argument("simulate_chain: requires s > t");
    if (cfg.paths < 2 || cfg.steps < 1) throw std::invalid_argument("simulate_chain: bad config");
    const int threads = resolve_thread_count(cfg.threads);
    Eigen::MatrixXd endpoints(cfg.paths, problem.dims.nd());
    run_paths(cfg.paths, threads, [&](long p) {
        const std::uint64_t stream = cfg.antithetic ? static_cast<std::uint64_t>(p / 2)
                                                    : static_cast<std::uint64_t>(p);
        const double sign = (cfg.antithetic && (p % 2 == 1)) ? -1.0 : 1.0;
        endpoints.row(p) =
            euler_path(problem, t, x, s, cfg.steps, cfg.seed, stream, sign, nullptr);
    });
    return endpoints;
}

FkResult fk_estimate(const ChainProblem& problem, double t, const Eigen::VectorXd& x,
                     const McConfig& cfg) {
    const double T = problem.dims.horizon_T;
    if (t > T) throw std::invalid_argument("fk_estimate: t beyond the horizon");
    if (cfg.paths < 2 || cfg.steps < 1) throw std::invalid_argument("fk_estimate: bad config");
    FkResult out;
    out.paths = cfg.paths;
    out.steps = cfg.steps;
    out.seed = cfg.seed;
    if (t == T) {
        out.estimate = problem.terminal_g.eval(x);
        return out;
    }
    const int threads = resolve_thread_count(cfg.threads);
    std::vector<double> values(static_cast<size_t>(cfg.paths), 0.0);
    run_paths(cfg.paths, threads, [&](long p) {
        const std::uint64_t stream = cfg.antithetic ? static_cast<std::uint64_t>(p / 2)
                                                    : static_cast<std::uint64_t>(p);
        const double sign = (cfg.antithetic && (p % 2 == 1)) ? -1.0 : 1.0;
        double source_acc = 0.0;
        const Eigen::VectorXd xT =
            euler_path(problem, t, x, T, cfg.steps, cfg.seed, stream, sign, &source_acc);
        values[static_cast<size_t>(p)] = problem.terminal_g.eval(xT) + source_acc;
    });
    // Fixed-order reduction for determinism under any thread count.
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(cfg.paths);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(cfg.paths - 1);
    out.estimate = mean;
    out.halfwidth = 1.96 * std::sqrt(var / static_cast<double>(cfg.paths));
    return out;
}

double gaussian_chain_oracle(const ChainProblem& problem, double t, const Eigen::VectorXd& x,
                             const TerminalData& g) {
    if (!problem.drift_is_affine || !problem.a_is_constant)
        throw std::invalid_argument("gaussian_chain_oracle: needs affine drift + constant a");
    if (!g.is_polynomial)
        throw std::invalid_argument("gaussian_chain_oracle: unsupported terminal form");
    const int nd = problem.dims.nd();
    const double T = problem.dims.horizon_T;
    const double span = T - t;
    Eigen::VectorXd mean(nd);
    if (span == 0.0) {
        mean = x;
    } else {
        // Augmented exponential handles the affine part exactly.
        Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(nd + 1, nd + 1);
        aug.topLeftCorner(nd, nd) = problem.affine_A;
        aug.topRightCorner(nd, 1) = problem.affine_b;
        const Eigen::MatrixXd E = (span * aug).exp();
        mean = E.topLeftCorner(nd, nd) * x + E.topRightCorner(nd, 1);
    }
    double value = g.poly_c0 + g.poly_c.dot(mean);
    if (g.poly_Q.size() > 0 && g.poly_Q.cwiseAbs().maxCoeff() > 0.0) {
        if (span == 0.0) return value + mean.dot(g.poly_Q * mean);
        FrozenProxy proxy(problem, t, x, 64);
        const Eigen::MatrixXd cov = proxy.covariance(t, T);
        value += mean.dot(g.poly_Q * mean) + (g.poly_Q * cov).trace();
    }
    return value;
}

}  // namespace schauder
