#include "schauder/lab.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "schauder/quadrature.hpp"

namespace schauder {

namespace {

std::pair<std::string, int> parse_data_name(const std::string& name) {
    const auto colon = name.find(':');
    if (colon == std::string::npos) return {name, -1};
    return {name.substr(0, colon), std::atoi(name.c_str() + colon + 1)};
}

}  // namespace

TerminalData make_terminal(const std::string& name, const ChainDims& dims) {
    TerminalData g;
    const auto [kind, arg] = parse_data_name(name);
    const int nd = dims.nd();
    g.poly_Q = Eigen::MatrixXd::Zero(nd, nd);
    g.poly_c = Eigen::VectorXd::Zero(nd);
    if (kind == "zero") {
        g.eval = [](const Eigen::VectorXd&) { return 0.0; };
        g.depends_on = {};
        g.is_polynomial = true;
    } else if (kind == "one") {
        g.eval = [](const Eigen::VectorXd&) { return 1.0; };
        g.depends_on = {};
        g.is_polynomial = true;
        g.poly_c0 = 1.0;
    } else if (kind == "coord") {
        if (arg < 0 || arg >= nd) throw ConfigError("terminal", "coordinate out of range");
        g.eval = [arg](const Eigen::VectorXd& x) { return x[arg]; };
        g.depends_on = {arg};
        g.is_polynomial = true;
        g.poly_c[arg] = 1.0;
    } else if (kind == "sq") {
        if (arg < 0 || arg >= nd) throw ConfigError("terminal", "coordinate out of range");
        g.eval = [arg](const Eigen::VectorXd& x) { return x[arg] * x[arg]; };
        g.depends_on = {arg};
        g.is_polynomial = true;
        g.poly_Q(arg, arg) = 1.0;
    } else if (kind == "sin") {
        if (arg < 0 || arg >= nd) throw ConfigError("terminal", "coordinate out of range");
        g.eval = [arg](const Eigen::VectorXd& x) { return std::sin(x[arg]); };
        g.depends_on = {arg};
        g.is_polynomial = false;
    } else {
        throw ConfigError("terminal", "unknown terminal data: " + name);
    }
    return g;
}

SourceData make_source(const std::string& name, const ChainDims& dims) {
    SourceData f;
    const auto [kind, arg] = parse_data_name(name);
    if (kind == "zero") {
        f.eval = [](double, const Eigen::VectorXd&) { return 0.0; };
        f.depends_on = {};
    } else if (kind == "one") {
        f.eval = [](double, const Eigen::VectorXd&) { return 1.0; };
        f.depends_on = {};
    } else if (kind == "coord") {
        if (arg < 0 || arg >= dims.nd()) throw ConfigError("source", "coordinate out of range");
        f.eval = [arg](double, const Eigen::VectorXd& x) { return x[arg]; };
        f.depends_on = {arg};
    } else if (kind == "sin") {
        if (arg < 0 || arg >= dims.nd()) throw ConfigError("source", "coordinate out of range");
        f.eval = [arg](double, const Eigen::VectorXd& x) { return std::sin(x[arg]); };
        f.depends_on = {arg};
    } else {
        throw ConfigError("source", "unknown source data: " + name);
    }
    return f;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    auto get_or = [&](const char* key, auto fallback) {
        using T = decltype(fallback);
        if (!j.contains(key)) return fallback;
        try {
            return j.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(key, "invalid type");
        }
    };
    cfg.problem = get_or("problem", std::string("l0"));
    cfg.dims.n = get_or("n", 2);
    cfg.dims.d = get_or("d", 1);
    cfg.dims.gamma = get_or("gamma", 0.5);
    cfg.dims.horizon_T = get_or("T", 1.0);
    if (cfg.dims.n < 1) throw ConfigError("n", "must be >= 1");
    if (cfg.dims.d < 1) throw ConfigError("d", "must be >= 1");
    if (!(cfg.dims.gamma > 0.0 && cfg.dims.gamma < 1.0))
        throw ConfigError("gamma", "must lie in (0,1)");
    if (!(cfg.dims.horizon_T > 0.0)) throw ConfigError("T", "must be > 0");
    if (cfg.dims.nd() > 6) throw ConfigError("n", "n*d exceeds the quadrature limit 6");
    bool known = false;
    for (const auto& name : catalog_names()) known = known || (name == cfg.problem);
    if (!known) throw ConfigError("problem", "unknown catalog entry: " + cfg.problem);

    if (j.contains("params")) {
        const auto& p = j.at("params");
        if (p.contains("amp")) cfg.params.amp = p.at("amp").get<double>();
        if (p.contains("a_amp")) cfg.params.a_amp = p.at("a_amp").get<double>();
        if (p.contains("rough_exponent"))
            cfg.params.rough_exponent = p.at("rough_exponent").get<double>();
        if (p.contains("sawtooth_period"))
            cfg.params.sawtooth_period = p.at("sawtooth_period").get<double>();
        if (p.contains("rough_levels")) cfg.params.rough_levels = p.at("rough_levels").get<int>();
        if (p.contains("phase_seed"))
            cfg.params.phase_seed = p.at("phase_seed").get<std::uint64_t>();
    }
    cfg.terminal = get_or("terminal", std::string());
    cfg.source = get_or("source", std::string());

    const int nd = cfg.dims.nd();
    cfg.box_lo = Eigen::VectorXd::Constant(nd, -1.0);
    cfg.box_hi = Eigen::VectorXd::Constant(nd, 1.0);
    if (j.contains("box")) {
        const auto lo = j.at("box").at("lo").get<std::vector<double>>();
        const auto hi = j.at("box").at("hi").get<std::vector<double>>();
        if (static_cast<int>(lo.size()) != nd || static_cast<int>(hi.size()) != nd)
            throw ConfigError("box", "lo/hi must have n*d entries");
        for (int c = 0; c < nd; ++c) {
            cfg.box_lo[c] = lo[static_cast<size_t>(c)];
            cfg.box_hi[c] = hi[static_cast<size_t>(c)];
            if (!(cfg.box_hi[c] > cfg.box_lo[c])) throw ConfigError("box", "hi must exceed lo");
        }
    }
    cfg.samples = get_or("samples", 256);
    if (cfg.samples < 2) throw ConfigError("samples", "must be >= 2");
    cfg.seed = get_or("seed", static_cast<std::uint64_t>(42));
    cfg.pipeline = get_or("pipeline", std::vector<std::string>{"check"});
    cfg.mollify_levels = get_or("mollify_levels", std::vector<int>{});
    cfg.mollify_quad = get_or("mollify_quad", 8);

    cfg.grid.t_lo = 0.0;
    cfg.grid.t_hi = cfg.dims.horizon_T;
    cfg.grid.x_lo = cfg.box_lo;
    cfg.grid.x_hi = cfg.box_hi;
    cfg.grid.time_points = 5;
    cfg.grid.points_per_coord.assign(static_cast<size_t>(nd), 13);
    if (j.contains("grid")) {
        const auto& gj = j.at("grid");
        cfg.grid.time_points = gj.value("time_points", 5);
        if (cfg.grid.time_points < 2) throw ConfigError("grid.time_points", "must be >= 2");
        if (gj.contains("points")) {
            const auto pts = gj.at("points").get<std::vector<int>>();
            if (static_cast<int>(pts.size()) != nd)
                throw ConfigError("grid.points", "needs n*d entries");
            cfg.grid.points_per_coord = pts;
        }
        const double pad = gj.value("pad", 0.0);
        cfg.grid.x_lo = cfg.box_lo.array() - pad;
        cfg.grid.x_hi = cfg.box_hi.array() + pad;
    }
    if (j.contains("solver")) {
        const auto& sj = j.at("solver");
        cfg.solver.flow_steps = sj.value("flow_steps", cfg.solver.flow_steps);
        cfg.solver.time_quad = sj.value("time_quad", cfg.solver.time_quad);
        cfg.solver.gh_nodes = sj.value("gh_nodes", cfg.solver.gh_nodes);
        cfg.solver.cov_quad = sj.value("cov_quad", cfg.solver.cov_quad);
        cfg.solver.tol = sj.value("tol", cfg.solver.tol);
        cfg.solver.max_iter = sj.value("max_iter", cfg.solver.max_iter);
        if (cfg.solver.max_iter < 1) throw ConfigError("solver.max_iter", "must be >= 1");
    }
    if (j.contains("mc")) {
        const auto& mj = j.at("mc");
        cfg.mc.paths = mj.value("paths", cfg.mc.paths);
        cfg.mc.steps = mj.value("steps", cfg.mc.steps);
        cfg.mc.antithetic = mj.value("antithetic", false);
        if (cfg.mc.paths < 2) throw ConfigError("mc.paths", "must be >= 2");
        if (cfg.mc.steps < 1) throw ConfigError("mc.steps", "must be >= 1");
    }
    cfg.mc.seed = cfg.seed;
    cfg.c0 = get_or("c0", 0.25);
    if (!(cfg.c0 > 0.0 && cfg.c0 <= 1.0)) throw ConfigError("c0", "must lie in (0,1]");
    cfg.lambda = get_or("lambda", 1.0);
    if (!(cfg.lambda > 0.0)) throw ConfigError("lambda", "must be > 0");
    if (j.contains("besov")) {
        const auto& bj = j.at("besov");
        cfg.besov_level = bj.value("level", 2);
        cfg.besov_theta = bj.value("theta", std::vector<int>{});
        cfg.besov_k_lo = bj.value("k_lo", 3);
        cfg.besov_k_hi = bj.value("k_hi", 9);
        if (cfg.besov_level < 2 || cfg.besov_level > cfg.dims.n)
            throw ConfigError("besov.level", "must lie in [2, n]");
    }
    if (cfg.besov_theta.empty())
        cfg.besov_theta.assign(static_cast<size_t>(cfg.dims.n), 0);
    if (static_cast<int>(cfg.besov_theta.size()) != cfg.dims.n)
        throw ConfigError("besov.theta", "needs one entry per block");
    cfg.out_dir = get_or("out", std::string("out"));
    cfg.strict = get_or("strict", false);
    return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["problem"] = problem;
    j["n"] = dims.n;
    j["d"] = dims.d;
    j["gamma"] = dims.gamma;
    j["T"] = dims.horizon_T;
    j["params"] = {{"amp", params.amp},
                   {"a_amp", params.a_amp},
                   {"rough_exponent", params.rough_exponent},
                   {"sawtooth_period", params.sawtooth_period},
                   {"rough_levels", params.rough_levels},
                   {"phase_seed", params.phase_seed}};
    j["terminal"] = terminal;
    j["source"] = source;
    j["box"] = {{"lo", std::vector<double>(box_lo.data(), box_lo.data() + box_lo.size())},
                {"hi", std::vector<double>(box_hi.data(), box_hi.data() + box_hi.size())}};
    j["samples"] = samples;
    j["seed"] = seed;
    j["pipeline"] = pipeline;
    j["mollify_levels"] = mollify_levels;
    j["c0"] = c0;
    j["lambda"] = lambda;
    j["out"] = out_dir;
    j["strict"] = strict;
    return j;
}

ChainProblem ExperimentConfig::build_problem() const {
    ChainProblem p = make_catalog_problem(problem, dims, params);
    if (!terminal.empty()) p.terminal_g = make_terminal(terminal, dims);
    if (!source.empty()) p.source_f = make_source(source, dims);
    return p;
}

double field_space_norm_order2(const SampledField& field, const ChainDims& dims,
                               int time_index) {
    const int d = dims.d;
    double total = 0.0;
    const double sup_u = [&] {
        double m = 0.0;
        for (long f = 0; f < field.space_size(); ++f)
            m = std::max(m, std::abs(field.at(time_index, f)));
        return m;
    }();

    // Pair seminorm of `values` along coordinate `coord` with exponent beta:
    // all forward pairs on every grid line parallel to the axis.
    auto axis_seminorm = [&](const SampledField& values, int coord, double beta) {
        const int extent = values.points()[static_cast<size_t>(coord)];
        const double h = values.spatial_step(coord);
        const long stride = values.stride(coord);
        double semi = 0.0;
        for (long f = 0; f < values.space_size(); ++f) {
            const long i = (f / stride) % extent;
            const double base = values.at(time_index, f);
            for (long jj = i + 2; jj < extent; ++jj) {
                const double other = values.at(time_index, f + (jj - i) * stride);
                const double gap = static_cast<double>(jj - i) * h;
                semi = std::max(semi, std::abs(other - base) / std::pow(gap, beta));
            }
        }
        return semi;
    };

    // Direction 1: sup + gradient sup + Hessian sup + gamma-seminorm of the
    // Hessian along block-1 coordinates.
    {
        double grad_sup = 0.0, hess_sup = 0.0, hess_semi = 0.0;
        std::vector<SampledField> d1, d2;
        for (int c = 0; c < d; ++c) d1.push_back(field.derivative(c));
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) d2.push_back(field.second_derivative(a, b));
        for (long f = 0; f < field.space_size(); ++f) {
            double g2 = 0.0, h2 = 0.0;
            for (int c = 0; c < d; ++c) {
                const double v = d1[static_cast<size_t>(c)].at(time_index, f);
                g2 += v * v;
            }
            for (const auto& fld : d2) {
                const double v = fld.at(time_index, f);
                h2 += v * v;
            }
            grad_sup = std::max(grad_sup, std::sqrt(g2));
            hess_sup = std::max(hess_sup, std::sqrt(h2));
        }
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                for (int c = 0; c < d; ++c)
                    hess_semi = std::max(
                        hess_semi,
                        axis_seminorm(d2[static_cast<size_t>(a) * d + b], c, dims.gamma));
        total += sup_u + grad_sup + hess_sup + hess_semi;
    }
    // Directions i >= 2: fractional exponent (2 + gamma) / (2i - 1) < 1.
    for (int i = 2; i <= dims.n; ++i) {
        const double beta = (2.0 + dims.gamma) / (2.0 * i - 1.0);
        double semi = 0.0;
        for (int c = (i - 1) * d; c < i * d; ++c)
            semi = std::max(semi, axis_seminorm(field, c, beta));
        total += sup_u + semi;
    }
    return total;
}

SchauderReport schauder_constant_report(const ChainProblem& problem,
                                        const std::vector<int>& mollify_levels,
                                        const SolverGrid& grid, const SolverOptions& options,
                                        int norm_samples, std::uint64_t seed) {
    SchauderReport report;
    const ChainDims& dims = problem.dims;
    const Box data_box{grid.x_lo, grid.x_hi};

    const ScalarField graw = [&](const Eigen::VectorXd& x) { return problem.terminal_g.eval(x); };
    const double g_norm =
        holder_norm_anisotropic(graw, dims, 2, data_box, norm_samples, seed).cb_total;
    double f_norm = 0.0;
    for (double t : {0.0, 0.5 * dims.horizon_T, dims.horizon_T}) {
        const ScalarField fr = [&, t](const Eigen::VectorXd& x) {
            return problem.source_f.eval(t, x);
        };
        f_norm = std::max(
            f_norm, holder_norm_anisotropic(fr, dims, 0, data_box, norm_samples, seed).cb_total);
    }
    const double data_norm = g_norm + f_norm;

    for (int m : mollify_levels) {
        Mollifier mol;
        mol.m = m;
        MollifyOptions mopt;
        mopt.mollify_data = true;
        const ChainProblem mollified = mollify(problem, mol, mopt);
        const SolveResult res = parametrix_solve(mollified, grid, options);
        double unorm = 0.0;
        for (int ti = 0; ti < res.u.time_points(); ++ti)
            unorm = std::max(unorm, field_space_norm_order2(res.u, dims, ti));
        SchauderRow row;
        row.m = m;
        row.solution_norm = unorm;
        row.data_norm = data_norm;
        row.ratio = (data_norm == 0.0) ? 0.0 : unorm / data_norm;
        report.rows.push_back(row);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& row : report.rows) {
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
    }
    report.ratio_spread = (hi == 0.0) ? 0.0 : (hi - lo) / hi;
    report.stable = report.ratio_spread <= 0.05;
    return report;
}

namespace {

struct SampleSet {
    std::vector<double> t, s;
    std::vector<Eigen::VectorXd> x, xp;
};

SampleSet make_pair_samples(const ChainDims& dims, const Box& box, int count,
                            std::uint64_t seed) {
    SampleSet set;
    WeylSampler sampler(2 * dims.nd() + 2, seed);
    for (int k = 0; k < count; ++k) {
        const Eigen::VectorXd u = sampler.point(static_cast<std::uint64_t>(k));
        const double t = 0.5 * dims.horizon_T * u[0];
        const double s = t + (0.05 + 0.95 * u[1]) * (dims.horizon_T - t);
        set.t.push_back(t);
        set.s.push_back(s);
        set.x.push_back(box.map_unit(u.segment(2, dims.nd())));
        set.xp.push_back(box.map_unit(u.segment(2 + dims.nd(), dims.nd())));
    }
    return set;
}

}  // namespace

SensitivityReport sensitivity_suite(const ChainProblem& problem, const Box& box, int samples,
                                    std::uint64_t seed, double c0,
                                    const SampledField* u_field, const SolverOptions& options) {
    const ChainDims& dims = problem.dims;
    const double T = dims.horizon_T;
    SensitivityReport report;

    auto flow_row = [&](int count) {
        const SampleSet set = make_pair_samples(dims, box, count, seed + 1);
        double worst = 0.0;
        for (size_t k = 0; k < set.t.size(); ++k) {
            const double dist = quasi_distance(set.x[k], set.xp[k], dims);
            if (dist < 1e-10) continue;
            const FlowPath fx =
                solve_flow(problem, set.t[k], set.x[k], set.s[k], options.flow_steps);
            const FlowPath fxp =
                solve_flow(problem, set.t[k], set.xp[k], set.s[k], options.flow_steps);
            const double num =
                quasi_distance(fx.eval(set.s[k]), fxp.eval(set.s[k]), dims);
            worst = std::max(worst, num / (dist + std::sqrt(set.s[k] - set.t[k])));
        }
        return worst;
    };

    auto cov_res_rows = [&](int count) {
        const SampleSet set = make_pair_samples(dims, box, count, seed + 2);
        double worst_cov = 0.0, worst_res = 0.0;
        for (size_t k = 0; k < set.t.size(); ++k) {
            const double dist = quasi_distance(set.x[k], set.xp[k], dims);
            if (dist < 1e-10) continue;
            const double t = set.t[k], s = set.s[k];
            FrozenProxy px(problem, t, set.x[k], options.flow_steps);
            FrozenProxy pxp(problem, t, set.xp[k], options.flow_steps);
            const double span_pow = std::pow(s - t, 0.5 * dims.gamma);
            const double dg = std::pow(dist, dims.gamma);
            const double cov_gap =
                (px.covariance(t, s).topLeftCorner(dims.d, dims.d) -
                 pxp.covariance(t, s).topLeftCorner(dims.d, dims.d))
                    .cwiseAbs()
                    .maxCoeff();
            worst_cov = std::max(worst_cov, cov_gap / ((s - t) * (dg + span_pow)));
            const Eigen::MatrixXd dr = px.resolvent(t, s) - pxp.resolvent(t, s);
            for (int i = 2; i <= dims.n; ++i)
                for (int jb = 1; jb < i; ++jb) {
                    const double blk =
                        dr.block(static_cast<Eigen::Index>(i - 1) * dims.d,
                                 static_cast<Eigen::Index>(jb - 1) * dims.d, dims.d, dims.d)
                            .cwiseAbs()
                            .maxCoeff();
                    worst_res = std::max(
                        blk / (std::pow(s - t, static_cast<double>(i - jb)) * (span_pow + dg)),
                        worst_res);
                }
        }
        return std::make_pair(worst_cov, worst_res);
    };

    auto freezing_row = [&](int count) {
        const SampleSet set = make_pair_samples(dims, box, count, seed + 3);
        double worst = 0.0;
        for (size_t k = 0; k < set.t.size(); ++k) {
            const double dist = quasi_distance(set.x[k], set.xp[k], dims);
            if (dist < 1e-10) continue;
            const double t = set.t[k];
            const double t0 = std::min(t + c0 * dist * dist, T);
            if (t0 <= t + 1e-12) continue;
            FrozenProxy px(problem, t, set.x[k], options.flow_steps);
            const Eigen::VectorXd frozen_mean = px.mean(t, t0, set.xp[k]);
            const FlowPath fxp = solve_flow(problem, t, set.xp[k], t0, options.flow_steps);
            const double num = quasi_distance(frozen_mean, fxp.eval(t0), dims);
            worst = std::max(
                worst, num / (std::pow(c0, 1.0 / (2.0 * dims.n - 1.0)) * dist));
        }
        return worst;
    };

    auto reverse_taylor_row = [&](int count) {
        const SampleSet set = make_pair_samples(dims, box, count, seed + 4);
        double worst = 0.0;
        for (size_t k = 0; k < set.t.size(); ++k) {
            const double dist = quasi_distance(set.x[k], set.xp[k], dims);
            if (dist < 1e-10) continue;
            const Eigen::MatrixXd j1 =
                problem.drift_subdiagonal_jacobian(set.t[k], set.x[k]);
            const Eigen::MatrixXd j2 =
                problem.drift_subdiagonal_jacobian(set.t[k], set.xp[k]);
            worst = std::max(worst, (j1 - j2).cwiseAbs().maxCoeff() /
                                        std::pow(dist, dims.gamma));
        }
        return worst;
    };

    auto add_row = [&](const std::string& name, double base_val, double refined_val) {
        SensitivityRow row;
        row.name = name;
        row.constant = base_val;
        row.refined = refined_val;
        const double lo = std::min(base_val, refined_val);
        const double hi = std::max(base_val, refined_val);
        row.stable = (hi == 0.0) || hi <= 1.3 * std::max(lo, 1e-300);
        report.rows.push_back(row);
    };

    add_row("flow_sensitivity", flow_row(samples), flow_row(2 * samples));
    {
        const auto [cov1, res1] = cov_res_rows(samples);
        const auto [cov2, res2] = cov_res_rows(2 * samples);
        add_row("covariance_sensitivity", cov1, cov2);
        add_row("resolvent_sensitivity", res1, res2);
    }
    add_row("freezing_point_sensitivity", freezing_row(samples), freezing_row(2 * samples));
    add_row("reverse_taylor", reverse_taylor_row(samples), reverse_taylor_row(2 * samples));

    // Discontinuity of the change of freezing: slope of the D^2 semigroup gap
    // against c0.
    {
        SampledField internal;
        const SampledField* field = u_field;
        if (!field) {
            Mollifier mol;
            mol.m = 16;
            const ChainProblem mollified = mollify(problem, mol);
            SolverGrid grid;
            grid.t_hi = T;
            grid.time_points = 4;
            grid.x_lo = box.lo;
            grid.x_hi = box.hi;
            grid.points_per_coord.assign(static_cast<size_t>(dims.nd()), 11);
            SolverOptions opt = options;
            opt.gh_nodes = std::min(options.gh_nodes, 10);
            internal = parametrix_solve(mollified, grid, opt).u;
            field = &internal;
        }
        WeylSampler sampler(2 * dims.nd(), seed + 5);
        double slope_acc = 0.0;
        int slope_count = 0;
        for (int pair = 0; pair < 2; ++pair) {
            const Eigen::VectorXd u = sampler.point(static_cast<std::uint64_t>(pair));
            const Eigen::VectorXd x =
                box.lo + 0.25 * box.width() + 0.5 * box.width().cwiseProduct(
                                                  u.segment(0, dims.nd()));
            Eigen::VectorXd xp = x;
            xp += 0.2 * box.width().cwiseProduct(
                      (u.segment(dims.nd(), dims.nd()).array() - 0.5).matrix());
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int m = 0;
            for (int k = 0; k < 5; ++k) {
                const double c = c0 * std::pow(2.0, -k);
                const RegimeSplitReport rep =
                    regime_split_expand(problem, *field, 0.0, x, xp, c, options);
                if (rep.discontinuity_d2_ratio <= 0.0) continue;
                const double lx = std::log(c), ly = std::log(rep.discontinuity_d2_ratio);
                sx += lx;
                sy += ly;
                sxx += lx * lx;
                sxy += lx * ly;
                ++m;
            }
            if (m >= 2) {
                slope_acc += (m * sxy - sx * sy) / (m * sxx - sx * sx);
                ++slope_count;
            }
        }
        report.discontinuity_slope = slope_count ? slope_acc / slope_count : 0.0;
        report.discontinuity_predicted = dims.gamma / (2.0 * dims.n - 1.0);
        report.discontinuity_ok =
            slope_count > 0 &&
            std::abs(report.discontinuity_slope - report.discontinuity_predicted) <= 0.3;
        SensitivityRow row;
        row.name = "discontinuity_term_slope";
        row.constant = report.discontinuity_slope;
        row.refined = report.discontinuity_predicted;
        row.stable = report.discontinuity_ok;
        report.rows.push_back(row);
    }

    report.all_stable = true;
    for (const auto& row : report.rows) report.all_stable = report.all_stable && row.stable;
    return report;
}

// --- run_experiment -----------------------------------------------------------

namespace {

void append_report(ExperimentOutcome& outcome, DiagnosticReport rep) {
    if (rep.pass.has_value() && !*rep.pass) outcome.any_fail = true;
    outcome.reports.push_back(std::move(rep));
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    ExperimentOutcome outcome;
    fs::create_directories(cfg.out_dir);
    const ChainProblem problem = cfg.build_problem();
    const ChainProblem effective = cfg.mollify_levels.empty()
                                       ? problem
                                       : [&] {
                                             Mollifier mol;
                                             mol.m = cfg.mollify_levels.front();
                                             MollifyOptions mopt;
                                             mopt.quad_points = cfg.mollify_quad;
                                             return mollify(problem, mol, mopt);
                                         }();
    const Box box = cfg.box();
    std::optional<SampledField> solved;

    for (const std::string& stage : cfg.pipeline) {
        if (stage == "check") {
            const ProblemValidation val = validate_problem(problem, box, cfg.samples, cfg.seed);
            const AssumptionReport rep = check_assumptions(problem, box, cfg.samples, cfg.seed);
            DiagnosticReport out;
            out.name = "assumption_checks";
            out.module = "model";
            out.quantity = "ellipticity / transmission-rank / drift moduli";
            out.scalars["kappa_hat"] = rep.ue.kappa_hat;
            out.scalars["min_eigen"] = rep.ue.min_eigen;
            out.scalars["sigma_reconstruction_error"] = val.sigma_reconstruction_error;
            out.scalars["structure_violation"] = val.structure_violation;
            out.series["hormander_min_singular_values"] = rep.hormander.min_singular_values;
            out.pass = rep.pass() && val.pass;
            std::vector<std::vector<double>> rows;
            for (const auto& m : rep.drift.moduli)
                rows.push_back({static_cast<double>(m.level), static_cast<double>(m.variable),
                                m.exponent, m.seminorm, m.refined_seminorm,
                                m.growing ? 1.0 : 0.0});
            write_csv_table(cfg.out_dir + "/drift_moduli.csv",
                            {"level", "variable", "exponent", "seminorm", "refined", "growing"},
                            rows);
            append_report(outcome, std::move(out));
        } else if (stage == "proxy") {
            const Eigen::VectorXd x0 = 0.5 * (box.lo + box.hi);
            FrozenProxy proxy(effective, 0.0, x0, cfg.solver.flow_steps);
            DiagnosticReport out;
            out.name = "proxy_diagnostics";
            out.module = "proxy";
            out.quantity = "scaling sandwich / moment identities / mass";
            bool pass = true;
            std::vector<double> gsp_lo, gsp_hi, residual_max;
            for (double gap : {0.01, 0.1, 1.0}) {
                const double s = std::min(gap, 0.95 * cfg.dims.horizon_T);
                const auto [lo, hi] = proxy.gsp_diagnostic(0.0, s);
                gsp_lo.push_back(lo);
                gsp_hi.push_back(hi);
                pass = pass && lo > 1e-2 && hi < 1e2;
                const auto residuals = proxy.moment_identity_check(0.0, s, x0, 20);
                double worst = 0.0;
                for (double r : residuals) worst = std::max(worst, r);
                residual_max.push_back(worst);
                pass = pass && worst < 1e-5;
            }
            const double mass = proxy.density_mass(0.0, 0.5 * cfg.dims.horizon_T, x0);
            out.scalars["density_mass"] = mass;
            out.series["gsp_min_eigen"] = gsp_lo;
            out.series["gsp_max_eigen"] = gsp_hi;
            out.series["moment_residuals"] = residual_max;
            pass = pass && std::abs(mass - 1.0) < 1e-6;
            out.pass = pass;
            append_report(outcome, std::move(out));
        } else if (stage == "solve") {
            const SolveResult res = parametrix_solve(effective, cfg.grid, cfg.solver);
            solved = res.u;
            res.u.save_csv(cfg.out_dir + "/solution.csv");
            res.u.save_binary(cfg.out_dir + "/solution.bin");
            DiagnosticReport out;
            out.name = "parametrix_solve";
            out.module = "solver";
            out.quantity = "Picard fixed point on the Duhamel expansion";
            out.scalars["iterations"] = res.iterations;
            out.scalars["extrapolation_count"] = static_cast<double>(res.extrapolation_count);
            out.series["sup_changes"] = res.sup_changes;
            out.pass = res.converged;
            append_report(outcome, std::move(out));
        } else if (stage == "fk") {
            const Eigen::VectorXd x0 = 0.5 * (box.lo + box.hi);
            McConfig mc = cfg.mc;
            mc.seed = cfg.seed;
            const FkResult fk = fk_estimate(effective, cfg.grid.t_lo, x0, mc);
            DiagnosticReport out;
            out.name = "feynman_kac";
            out.module = "feynman-kac";
            out.quantity = "Monte Carlo terminal/source expectation";
            out.scalars["estimate"] = fk.estimate;
            out.scalars["halfwidth"] = fk.halfwidth;
            out.scalars["paths"] = static_cast<double>(fk.paths);
            out.scalars["steps"] = static_cast<double>(fk.steps);
            out.scalars["seed"] = static_cast<double>(fk.seed);
            append_report(outcome, std::move(out));
        } else if (stage == "besov") {
            std::vector<double> svals;
            for (int k = cfg.besov_k_lo; k <= cfg.besov_k_hi; ++k)
                svals.push_back(std::pow(2.0, -k));
            const Eigen::VectorXd x0 = 0.5 * (box.lo + box.hi);
            ThermicConfig tcfg;
            tcfg.strict = cfg.strict;
            const PsiProfile profile = psi_besov_profile(
                problem, cfg.besov_level, cfg.besov_theta, 0.0, x0, svals, tcfg,
                cfg.solver.flow_steps);
            DiagnosticReport out;
            out.name = "besov_decay";
            out.module = "besov";
            out.quantity = "thermic norm slope of the degenerate remainder slice";
            out.scalars["slope"] = profile.slope;
            out.scalars["predicted_slope"] = profile.predicted_slope;
            out.scalars["saturated_slope"] = profile.saturated_slope;
            out.scalars["all_zero"] = profile.all_zero ? 1.0 : 0.0;
            std::vector<double> ss, norms;
            std::vector<std::vector<double>> rows;
            for (const auto& p : profile.points) {
                ss.push_back(p.s);
                norms.push_back(p.norm);
                rows.push_back({p.s, p.norm, p.raw_norm, p.envelope_volume});
            }
            out.series["s"] = ss;
            out.series["norm"] = norms;
            write_csv_table(cfg.out_dir + "/besov_profile.csv",
                            {"s", "norm", "raw_norm", "envelope_volume"}, rows);
            out.pass = profile.bound_verified();
            append_report(outcome, std::move(out));
        } else if (stage == "scale") {
            DiagnosticReport out;
            out.name = "scaling_identities";
            out.module = "scaling";
            out.quantity = "density correspondence / scaled covariance sensitivity";
            bool pass = true;
            std::vector<double> lambdas = {1.0, 0.5, 0.25};
            std::vector<double> residuals;
            for (double l : lambdas) {
                const DensityScalingResult r =
                    density_scaling_check(problem, l, 16, cfg.seed, box, cfg.solver.flow_steps);
                residuals.push_back(r.max_relative_residual);
                pass = pass && r.max_relative_residual < (l == 1.0 ? 1e-12 : 1e-6);
            }
            out.series["lambda"] = lambdas;
            out.series["density_residual"] = residuals;
            std::vector<int> theta(static_cast<size_t>(cfg.dims.n), 0);
            theta[0] = 1;
            const DerivativeScalingResult der = derivative_scaling_slope(
                problem, theta, {1.0, 0.5, 0.25, 0.125}, box, cfg.seed, cfg.solver.flow_steps);
            out.scalars["derivative_slope"] = der.slope;
            out.scalars["derivative_predicted"] = der.predicted;
            pass = pass && std::abs(der.slope - der.predicted) <= 0.1;
            if (cfg.lambda <= 1.0 && cfg.dims.horizon_T / cfg.lambda <= 1.0 + 1e-12) {
                const ScaledCovSensitivity sens = scaled_covariance_sensitivity(
                    problem, cfg.lambda, cfg.c0, std::min(cfg.samples, 32), cfg.seed, box,
                    cfg.solver.flow_steps);
                out.scalars["scaled_cov_ratio"] = sens.max_ratio;
                out.scalars["scaled_cov_refined"] = sens.refined_ratio;
                pass = pass && sens.stable;
            } else {
                throw ConfigError("lambda", "scaled diagnostics require lambda in (0,1] and T/lambda <= 1");
            }
            out.pass = pass;
            append_report(outcome, std::move(out));
        } else if (stage == "schauder") {
            const std::vector<int> levels =
                cfg.mollify_levels.empty() ? std::vector<int>{8, 16, 32} : cfg.mollify_levels;
            const SchauderReport rep = schauder_constant_report(
                problem, levels, cfg.grid, cfg.solver, cfg.samples, cfg.seed);
            DiagnosticReport out;
            out.name = "schauder_stability";
            out.module = "schauder-lab";
            out.quantity = "solution-to-data norm ratio across mollification levels";
            std::vector<std::vector<double>> rows;
            std::vector<double> ms, ratios;
            for (const auto& row : rep.rows) {
                rows.push_back({static_cast<double>(row.m), row.solution_norm, row.data_norm,
                                row.ratio});
                ms.push_back(row.m);
                ratios.push_back(row.ratio);
            }
            write_csv_table(cfg.out_dir + "/schauder_ratios.csv",
                            {"m", "solution_norm", "data_norm", "ratio"}, rows);
            out.series["m"] = ms;
            out.series["ratio"] = ratios;
            out.scalars["ratio_spread"] = rep.ratio_spread;
            out.pass = rep.stable;
            append_report(outcome, std::move(out));
        } else if (stage == "sensitivity") {
            const SensitivityReport rep =
                sensitivity_suite(problem, box, std::min(cfg.samples, 48), cfg.seed, cfg.c0,
                                  solved ? &*solved : nullptr, cfg.solver);
            DiagnosticReport out;
            out.name = "sensitivity_suite";
            out.module = "schauder-lab";
            out.quantity = "empirical constants of the sensitivity bounds";
            std::vector<std::vector<double>> rows;
            for (size_t r = 0; r < rep.rows.size(); ++r)
                rows.push_back({static_cast<double>(r), rep.rows[r].constant,
                                rep.rows[r].refined, rep.rows[r].stable ? 1.0 : 0.0});
            write_csv_table(cfg.out_dir + "/sensitivity.csv",
                            {"row", "constant", "refined", "stable"}, rows);
            for (const auto& row : rep.rows) out.scalars[row.name] = row.constant;
            out.scalars["discontinuity_slope"] = rep.discontinuity_slope;
            out.scalars["discontinuity_predicted"] = rep.discontinuity_predicted;
            out.pass = rep.all_stable;
            append_report(outcome, std::move(out));
        } else {
            throw ConfigError("pipeline", "unknown stage: " + stage);
        }
    }

    nlohmann::json summary;
    summary["metadata"]["config"] = cfg.to_json();
    summary["metadata"]["timestamp"] =
        static_cast<long>(std::chrono::duration_cast<std::chrono::seconds>(
                              std::chrono::system_clock::now().time_since_epoch())
                              .count());
    summary["pass"] = !outcome.any_fail;
    summary["reports"] = nlohmann::json::array();
    for (const auto& rep : outcome.reports) summary["reports"].push_back(rep.to_json());
    outcome.summary = summary;
    std::ofstream out(cfg.out_dir + "/summary.json", std::ios::binary);
    out << summary.dump(2) << "\n";
    return outcome;
}

}  // namespace schauder
