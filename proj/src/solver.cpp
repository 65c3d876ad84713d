#include "schauder/solver.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "schauder/quadrature.hpp"

namespace schauder {

namespace {

struct GhTensor {
    std::vector<double> weights;         // includes pi^{-nd/2}
    std::vector<Eigen::VectorXd> points; // standard-normal coordinates
};

GhTensor make_gh_tensor(int nodes, int dim) {
    const QuadratureRule rule = gauss_hermite(nodes);
    GhTensor out;
    const double norm = std::pow(M_PI, -0.5 * dim);
    Eigen::VectorXd z(dim);
    for_each_tensor_index(dim, nodes, [&](const std::vector<int>& idx) {
        double w = norm;
        for (int c = 0; c < dim; ++c) {
            w *= rule.weights[idx[static_cast<size_t>(c)]];
            z[c] = M_SQRT2 * rule.nodes[idx[static_cast<size_t>(c)]];
        }
        out.weights.push_back(w);
        out.points.push_back(z);
    });
    return out;
}

template <class Fn>
void parallel_for(long count, int threads, Fn&& fn) {
    if (threads <= 1 || count < 2) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long> next(0);
    auto worker = [&] {
        while (true) {
            const long i = next.fetch_add(1);
            if (i >= count) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = static_cast<int>(std::min<long>(threads, count));
    pool.reserve(static_cast<size_t>(nthreads));
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SCHAUDER_LAB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

double frozen_semigroup_apply(const FrozenProxy& proxy, const ScalarField& psi, double t,
                              double s, const Eigen::VectorXd& x, int gh_nodes) {
    if (!(s > t)) throw std::invalid_argument("frozen_semigroup_apply: requires s > t");
    const FrozenProxy::GaussianSlice slice = proxy.slice(t, s);
    const Eigen::VectorXd mean = slice.mean(x);
    const Eigen::MatrixXd L = slice.chol.matrixL();
    const QuadratureRule rule = gauss_hermite(gh_nodes);
    return gauss_hermite_expectation(rule, proxy.problem().dims.nd(),
                                     [&](const Eigen::VectorXd& z) { return psi(mean + L * z); });
}

std::vector<double> frozen_semigroup_derivative(const FrozenProxy::GaussianSlice& slice,
                                                const std::vector<int>& slot_bases, int d,
                                                const Eigen::VectorXd& x, const ScalarField& psi,
                                                int gh_nodes) {
    const Eigen::VectorXd mean = slice.mean(x);
    const Eigen::MatrixXd L = slice.chol.matrixL();
    const int nd = static_cast<int>(mean.size());
    const GhTensor gh = make_gh_tensor(gh_nodes, nd);
    std::vector<double> acc;
    for (size_t k = 0; k < gh.points.size(); ++k) {
        const Eigen::VectorXd y = mean + L * gh.points[k];
        const std::vector<double> w = gaussian_derivative_weights(slice, x, y, slot_bases, d);
        const double pv = psi(y) * gh.weights[k];
        if (acc.empty()) acc.assign(w.size(), 0.0);
        for (size_t j = 0; j < w.size(); ++j) acc[j] += w[j] * pv;
    }
    return acc;
}

double green_apply(const FrozenProxy& proxy, const SourceFn& f, double t, double t1, double t2,
                   const Eigen::VectorXd& x, int time_nodes, int gh_nodes) {
    if (!(t <= t1 && t1 < t2 && t2 <= proxy.problem().dims.horizon_T + 1e-12))
        throw std::invalid_argument("green_apply: requires t <= t1 < t2 <= T");
    const int nd = proxy.problem().dims.nd();
    const QuadratureRule rule_gh = gauss_hermite(gh_nodes);
    auto slice_integral = [&](double s) {
        const FrozenProxy::GaussianSlice slice = proxy.slice(t, s);
        const Eigen::VectorXd mean = slice.mean(x);
        const Eigen::MatrixXd L = slice.chol.matrixL();
        return gauss_hermite_expectation(rule_gh, nd, [&](const Eigen::VectorXd& z) {
            return f(s, mean + L * z);
        });
    };
    double acc = 0.0;
    if (t1 <= t + 1e-14) {
        // s = t + (t2 - t) r^2 clusters nodes at the s -> t Dirac limit.
        const QuadratureRule rule_r = gauss_legendre(time_nodes, 0.0, 1.0);
        const double span = t2 - t;
        for (int q = 0; q < rule_r.nodes.size(); ++q) {
            const double r = rule_r.nodes[q];
            acc += rule_r.weights[q] * 2.0 * span * r * slice_integral(t + span * r * r);
        }
    } else {
        const QuadratureRule rule_s = gauss_legendre(time_nodes, t1, t2);
        for (int q = 0; q < rule_s.nodes.size(); ++q)
            acc += rule_s.weights[q] * slice_integral(rule_s.nodes[q]);
    }
    return acc;
}

FieldDerivatives build_field_derivatives(const SampledField& u, const ChainDims& dims) {
    FieldDerivatives out;
    for (int c = 0; c < dims.d; ++c) out.d1.push_back(u.derivative(c));
    for (int a = 0; a < dims.d; ++a)
        for (int b = 0; b < dims.d; ++b) out.d2.push_back(u.second_derivative(a, b));
    for (int c = dims.d; c < dims.nd(); ++c) out.d_deg.push_back(u.derivative(c));
    return out;
}

namespace {

// (L - L~)u at (s, y) given the frozen data at theta_s.
double perturbation_total(const ChainProblem& problem, const Eigen::VectorXd& theta_s,
                          const Eigen::VectorXd& F_theta, const Eigen::MatrixXd& J_theta,
                          const Eigen::MatrixXd& a_theta, const FieldDerivatives& derivs,
                          double s, const Eigen::VectorXd& y, long* clamped) {
    const ChainDims& dims = problem.dims;
    const int d = dims.d;
    double acc = 0.0;
    // Non-degenerate part.
    const Eigen::VectorXd dF1 =
        problem.drift[0].eval(s, y) - F_theta.segment(0, d);
    for (int c = 0; c < d; ++c)
        acc += dF1[c] * derivs.d1[static_cast<size_t>(c)].value(s, y, clamped);
    const Eigen::MatrixXd da = problem.diffusion_a(s, y) - a_theta;
    if (da.cwiseAbs().maxCoeff() > 0.0) {
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                acc += 0.5 * da(a, b) *
                       derivs.d2[static_cast<size_t>(a) * d + b].value(s, y, clamped);
    }
    // Degenerate levels: Taylor remainder against the transmitting block.
    for (int i = 2; i <= dims.n; ++i) {
        const Eigen::VectorXd Fi = problem.drift[static_cast<size_t>(i - 1)].eval(s, y);
        const Eigen::VectorXd remainder =
            Fi - F_theta.segment(static_cast<Eigen::Index>(i - 1) * d, d) -
            J_theta.block(static_cast<Eigen::Index>(i - 1) * d,
                          static_cast<Eigen::Index>(i - 2) * d, d, d) *
                (y - theta_s).segment(static_cast<Eigen::Index>(i - 2) * d, d);
        for (int c = 0; c < d; ++c)
            acc += remainder[c] *
                   derivs.d_deg[static_cast<size_t>(i - 2) * d + c].value(s, y, clamped);
    }
    return acc;
}

}  // namespace

PerturbationTerms perturbation_residual(const ChainProblem& problem, const FrozenProxy& proxy,
                                        const SampledField& u_field,
                                        const FieldDerivatives& derivs, double s,
                                        const Eigen::VectorXd& y) {
    if (!u_field.strictly_interior(y))
        throw std::runtime_error("perturbation_residual: point too close to the grid boundary");
    const ChainDims& dims = problem.dims;
    const int d = dims.d;
    const Eigen::VectorXd theta_s = proxy.flow(s);
    PerturbationTerms terms;
    const Eigen::VectorXd dF1 = problem.drift[0].eval(s, y) - problem.drift[0].eval(s, theta_s);
    for (int c = 0; c < d; ++c)
        terms.delta1 += dF1[c] * derivs.d1[static_cast<size_t>(c)].value(s, y);
    const Eigen::MatrixXd da = problem.diffusion_a(s, y) - problem.diffusion_a(s, theta_s);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            terms.delta1 +=
                0.5 * da(a, b) * derivs.d2[static_cast<size_t>(a) * d + b].value(s, y);
    const Eigen::MatrixXd J = problem.drift_subdiagonal_jacobian(s, theta_s);
    for (int i = 2; i <= dims.n; ++i) {
        const Eigen::VectorXd remainder =
            problem.drift[static_cast<size_t>(i - 1)].eval(s, y) -
            problem.drift[static_cast<size_t>(i - 1)].eval(s, theta_s) -
            J.block(static_cast<Eigen::Index>(i - 1) * d, static_cast<Eigen::Index>(i - 2) * d,
                    d, d) *
                (y - theta_s).segment(static_cast<Eigen::Index>(i - 2) * d, d);
        double v = 0.0;
        for (int c = 0; c < d; ++c)
            v += remainder[c] * derivs.d_deg[static_cast<size_t>(i - 2) * d + c].value(s, y);
        terms.delta_i.push_back(v);
    }
    return terms;
}

PerturbationTerms perturbation_residual(const ChainProblem& problem, const FrozenProxy& proxy,
                                        const SampledField& u_field, double s,
                                        const Eigen::VectorXd& y) {
    const FieldDerivatives derivs = build_field_derivatives(u_field, problem.dims);
    return perturbation_residual(problem, proxy, u_field, derivs, s, y);
}

namespace {

struct SNodeCache {
    double weight = 0.0;  // GL weight x time-substitution Jacobian
    double s = 0.0;
    FrozenProxy::GaussianSlice slice;
    Eigen::VectorXd F_theta;
    Eigen::MatrixXd J_theta;
    Eigen::MatrixXd a_theta;
};

struct NodeCache {
    FrozenProxy::GaussianSlice terminal;
    std::vector<SNodeCache> snodes;
    double u0 = 0.0;
};

}  // namespace

SolveResult parametrix_solve(const ChainProblem& problem, const SolverGrid& grid,
                             const SolverOptions& options) {
    const ChainDims& dims = problem.dims;
    if (std::abs(grid.t_hi - dims.horizon_T) > 1e-12)
        throw std::invalid_argument("parametrix_solve: grid.t_hi must equal the problem horizon");
    if (grid.time_points < 2) throw std::invalid_argument("parametrix_solve: need >= 2 time points");
    const Box box{grid.x_lo, grid.x_hi};
    if (!options.skip_assumption_checks) {
        const UeReport ue = check_uniform_ellipticity(problem, box, 64, 7);
        const HormanderReport horm = check_hormander(problem, box, 64, 11);
        if (!ue.pass || !horm.pass)
            throw std::runtime_error("parametrix_solve: UE or Hormander check failed");
    }

    std::vector<double> times(static_cast<size_t>(grid.time_points));
    for (int k = 0; k < grid.time_points; ++k)
        times[static_cast<size_t>(k)] =
            grid.t_lo + (grid.t_hi - grid.t_lo) * k / (grid.time_points - 1);

    SampledField u(times, grid.x_lo, grid.x_hi, grid.points_per_coord);
    const int nt = u.time_points();
    const long nspace = u.space_size();
    const double T = grid.t_hi;

    for (long f = 0; f < nspace; ++f)
        u.at(nt - 1, f) = problem.terminal_g.eval(u.coordinates_flat(f));

    const int threads = resolve_thread_count(options.threads);
    const long n_nodes = static_cast<long>(nt - 1) * nspace;
    std::vector<NodeCache> caches(static_cast<size_t>(n_nodes));
    const GhTensor gh = make_gh_tensor(options.gh_nodes, dims.nd());
    const QuadratureRule rule_r = gauss_legendre(options.time_quad, 0.0, 1.0);

    parallel_for(n_nodes, threads, [&](long node) {
        const int ti = static_cast<int>(node / nspace);
        const long f = node % nspace;
        const double t = times[static_cast<size_t>(ti)];
        const Eigen::VectorXd x = u.coordinates_flat(f);
        FrozenProxy proxy(problem, t, x, options.flow_steps);
        NodeCache& cache = caches[static_cast<size_t>(node)];
        cache.terminal = proxy.slice(t, T, options.cov_quad);
        cache.snodes.resize(static_cast<size_t>(rule_r.nodes.size()));
        const double span = T - t;
        for (int q = 0; q < rule_r.nodes.size(); ++q) {
            const double r = rule_r.nodes[q];
            const double s = t + span * r * r;
            SNodeCache& sn = cache.snodes[static_cast<size_t>(q)];
            sn.s = s;
            sn.weight = rule_r.weights[q] * 2.0 * span * r;
            sn.slice = proxy.slice(t, s, options.cov_quad);
            const Eigen::VectorXd theta_s = sn.slice.mean_base;
            sn.F_theta = problem.drift_full(s, theta_s);
            sn.J_theta = problem.drift_subdiagonal_jacobian(s, theta_s);
            sn.a_theta = problem.diffusion_a(s, theta_s);
        }
        // u0 = P~ g + G~ f, frozen at (t, x).
        double u0 = 0.0;
        {
            const Eigen::VectorXd mean = cache.terminal.mean(x);
            const Eigen::MatrixXd L = cache.terminal.chol.matrixL();
            for (size_t k = 0; k < gh.points.size(); ++k)
                u0 += gh.weights[k] * problem.terminal_g.eval(mean + L * gh.points[k]);
        }
        for (const SNodeCache& sn : cache.snodes) {
            const Eigen::VectorXd mean = sn.slice.mean(x);
            const Eigen::MatrixXd L = sn.slice.chol.matrixL();
            double inner = 0.0;
            for (size_t k = 0; k < gh.points.size(); ++k)
                inner += gh.weights[k] * problem.source_f.eval(sn.s, mean + L * gh.points[k]);
            u0 += sn.weight * inner;
        }
        cache.u0 = u0;
        u.at(ti, f) = u0;
    });

    SolveResult result;
    std::vector<double> fresh(static_cast<size_t>(n_nodes), 0.0);
    std::vector<long> clamp_counts(static_cast<size_t>(n_nodes), 0);
    int growth_streak = 0;
    for (int iter = 0; iter < options.max_iter; ++iter) {
        const FieldDerivatives derivs = build_field_derivatives(u, dims);
        parallel_for(n_nodes, threads, [&](long node) {
            const int ti = static_cast<int>(node / nspace);
            const long f = node % nspace;
            const Eigen::VectorXd x = u.coordinates_flat(f);
            const NodeCache& cache = caches[static_cast<size_t>(node)];
            long clamped = 0;
            double remainder = 0.0;
            for (const SNodeCache& sn : cache.snodes) {
                const Eigen::VectorXd mean = sn.slice.mean(x);
                const Eigen::MatrixXd L = sn.slice.chol.matrixL();
                double inner = 0.0;
                for (size_t k = 0; k < gh.points.size(); ++k) {
                    const Eigen::VectorXd y = mean + L * gh.points[k];
                    inner += gh.weights[k] *
                             perturbation_total(problem, sn.slice.mean_base, sn.F_theta,
                                                sn.J_theta, sn.a_theta, derivs, sn.s, y,
                                                &clamped);
                }
                remainder += sn.weight * inner;
            }
            fresh[static_cast<size_t>(node)] = cache.u0 + remainder;
            clamp_counts[static_cast<size_t>(node)] = clamped;
            (void)ti;
        });
        double sup_change = 0.0;
        for (long node = 0; node < n_nodes; ++node) {
            const int ti = static_cast<int>(node / nspace);
            const long f = node % nspace;
            sup_change = std::max(sup_change, std::abs(fresh[static_cast<size_t>(node)] -
                                                       u.at(ti, f)));
            u.at(ti, f) = fresh[static_cast<size_t>(node)];
        }
        result.sup_changes.push_back(sup_change);
        result.iterations = iter + 1;
        if (result.sup_changes.size() >= 2 &&
            sup_change > result.sup_changes[result.sup_changes.size() - 2]) {
            if (++growth_streak >= 3)
                throw SolverDivergence("parametrix_solve: Picard iteration diverging",
                                       result.sup_changes);
        } else {
            growth_streak = 0;
        }
        if (sup_change < options.tol) {
            result.converged = true;
            break;
        }
    }
    for (long c : clamp_counts) result.extrapolation_count += c;
    result.u = std::move(u);
    return result;
}

namespace {

// Remainder integral int_{s_lo}^{s_hi} ds E_{p(t,s,eval,.)}[(L - L~)u] for the
// freezing encoded in `proxy`, evaluated at spatial point `eval`.
double remainder_segment(const ChainProblem& problem, const FrozenProxy& proxy,
                         const FieldDerivatives& derivs, double t, const Eigen::VectorXd& eval,
                         double s_lo, double s_hi, const SolverOptions& options,
                         const GhTensor& gh) {
    if (s_hi <= s_lo + 1e-14) return 0.0;
    const bool singular = s_lo <= t + 1e-14;
    const QuadratureRule rule = singular ? gauss_legendre(options.time_quad, 0.0, 1.0)
                                         : gauss_legendre(options.time_quad, s_lo, s_hi);
    double acc = 0.0;
    for (int q = 0; q < rule.nodes.size(); ++q) {
        double s, w;
        if (singular) {
            const double r = rule.nodes[q];
            const double span = s_hi - t;
            s = t + span * r * r;
            w = rule.weights[q] * 2.0 * span * r;
        } else {
            s = rule.nodes[q];
            w = rule.weights[q];
        }
        const FrozenProxy::GaussianSlice slice = proxy.slice(t, s, options.cov_quad);
        const Eigen::VectorXd theta_s = slice.mean_base;
        const Eigen::VectorXd F_theta = problem.drift_full(s, theta_s);
        const Eigen::MatrixXd J_theta = problem.drift_subdiagonal_jacobian(s, theta_s);
        const Eigen::MatrixXd a_theta = problem.diffusion_a(s, theta_s);
        const Eigen::VectorXd mean = slice.mean(eval);
        const Eigen::MatrixXd L = slice.chol.matrixL();
        double inner = 0.0;
        for (size_t k = 0; k < gh.points.size(); ++k) {
            const Eigen::VectorXd y = mean + L * gh.points[k];
            inner += gh.weights[k] * perturbation_total(problem, theta_s, F_theta, J_theta,
                                                        a_theta, derivs, s, y, nullptr);
        }
        acc += w * inner;
    }
    return acc;
}

}  // namespace

RegimeSplitReport regime_split_expand(const ChainProblem& problem, const SampledField& u_field,
                                      double t, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& x_prime, double c0,
                                      const SolverOptions& options) {
    if (!(c0 > 0.0 && c0 <= 1.0))
        throw std::invalid_argument("regime_split_expand: c0 must lie in (0,1]");
    const ChainDims& dims = problem.dims;
    const double T = dims.horizon_T;
    const double dist = quasi_distance(x, x_prime, dims);
    RegimeSplitReport rep;
    rep.d_gamma = std::pow(dist, dims.gamma);
    rep.t0 = std::min(t + c0 * dist * dist, T);
    if (dist == 0.0) {
        rep.t0 = t;
        return rep;
    }
    const GhTensor gh = make_gh_tensor(options.gh_nodes, dims.nd());
    const FieldDerivatives derivs = build_field_derivatives(u_field, dims);
    FrozenProxy proxy_x(problem, t, x, options.flow_steps);
    FrozenProxy proxy_xp(problem, t, x_prime, options.flow_steps);

    // Off-diagonal window [t, t0]: separate freezings (x at x, x' at x').
    const double off_x = remainder_segment(problem, proxy_x, derivs, t, x, t, rep.t0, options, gh);
    const double off_xp =
        remainder_segment(problem, proxy_xp, derivs, t, x_prime, t, rep.t0, options, gh);
    rep.off_diag = std::abs(off_x - off_xp);

    // Diagonal window [t0, T]: common freezing at x, evaluated at x and x'.
    const double diag_x =
        remainder_segment(problem, proxy_x, derivs, t, x, rep.t0, T, options, gh);
    const double diag_xp =
        remainder_segment(problem, proxy_x, derivs, t, x_prime, rep.t0, T, options, gh);
    rep.diag = std::abs(diag_x - diag_xp);

    // Discontinuity of the change of freezing at t0.
    if (rep.t0 > t + 1e-14) {
        auto apply_P = [&](const FrozenProxy& proxy, bool second_derivative) {
            const FrozenProxy::GaussianSlice slice = proxy.slice(t, rep.t0, options.cov_quad);
            const Eigen::VectorXd mean = slice.mean(x_prime);
            const Eigen::MatrixXd L = slice.chol.matrixL();
            double acc = 0.0;
            for (size_t k = 0; k < gh.points.size(); ++k) {
                const Eigen::VectorXd y = mean + L * gh.points[k];
                double w = gh.weights[k];
                if (second_derivative) {
                    const std::vector<double> wd =
                        gaussian_derivative_weights(slice, x_prime, y, {0, 0}, dims.d);
                    w *= wd[0];
                }
                acc += w * u_field.value(rep.t0, y);
            }
            return acc;
        };
        rep.discontinuity = std::abs(apply_P(proxy_xp, false) - apply_P(proxy_x, false));
        rep.discontinuity_d2 = std::abs(apply_P(proxy_xp, true) - apply_P(proxy_x, true));
    }
    rep.off_diag_ratio = rep.off_diag / rep.d_gamma;
    rep.diag_ratio = rep.diag / rep.d_gamma;
    rep.discontinuity_ratio = rep.discontinuity / rep.d_gamma;
    rep.discontinuity_d2_ratio = rep.discontinuity_d2 / rep.d_gamma;
    return rep;
}

ChainedSolveResult time_chained_solve(const ChainProblem& problem, int segments,
                                      const SolverGrid& grid, const SolverOptions& options) {
    if (segments < 1) throw std::invalid_argument("time_chained_solve: need N >= 1");
    const double T = problem.dims.horizon_T;
    if (std::abs(grid.t_hi - T) > 1e-12 || std::abs(grid.t_lo) > 1e-12)
        throw std::invalid_argument("time_chained_solve: grid must span [0, T]");

    ChainedSolveResult chained;
    SampledField prev;
    for (int k = 1; k <= segments; ++k) {
        const double seg_lo = T * (1.0 - static_cast<double>(k) / segments);
        const double seg_hi = T * (1.0 - static_cast<double>(k - 1) / segments);
        ChainProblem seg_problem = problem;
        seg_problem.dims.horizon_T = seg_hi;
        if (k > 1) {
            const SampledField terminal_field = prev;
            seg_problem.terminal_g.eval = [terminal_field, seg_hi](const Eigen::VectorXd& x) {
                return terminal_field.value(seg_hi, x);
            };
            seg_problem.terminal_g.is_polynomial = false;
        }
        SolverGrid seg_grid = grid;
        seg_grid.t_lo = seg_lo;
        seg_grid.t_hi = seg_hi;
        try {
            SolveResult res = parametrix_solve(seg_problem, seg_grid, options);
            if (!res.converged)
                throw std::runtime_error("time_chained_solve: segment " + std::to_string(k) +
                                         " did not converge");
            prev = res.u;
            chained.segments.push_back(std::move(res));
        } catch (const SolverDivergence& e) {
            throw std::runtime_error("time_chained_solve: segment " + std::to_string(k) +
                                     " diverged: " + e.what());
        }
    }

    // Merge segment grids from the earliest segment to the terminal time.
    std::vector<double> all_times;
    for (int k = segments; k >= 1; --k) {
        const SampledField& seg = chained.segments[static_cast<size_t>(k - 1)].u;
        const int upto = (k == 1) ? seg.time_points() : seg.time_points() - 1;
        for (int ti = 0; ti < upto; ++ti) all_times.push_back(seg.times()[static_cast<size_t>(ti)]);
    }
    SampledField merged(all_times, grid.x_lo, grid.x_hi, grid.points_per_coord);
    int row = 0;
    for (int k = segments; k >= 1; --k) {
        const SampledField& seg = chained.segments[static_cast<size_t>(k - 1)].u;
        const int upto = (k == 1) ? seg.time_points() : seg.time_points() - 1;
        for (int ti = 0; ti < upto; ++ti, ++row)
            for (long f = 0; f < merged.space_size(); ++f) merged.at(row, f) = seg.at(ti, f);
    }
    chained.u = std::move(merged);
    return chained;
}

}  // namespace schauder
