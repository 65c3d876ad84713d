#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "schauder/feynman_kac.hpp"
#include "schauder/solver.hpp"

using namespace schauder;

namespace {

const ChainDims dims{2, 1, 0.5, 1.0};

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

SolverGrid small_grid(double pad = 1.2, int pts = 13, int tp = 4) {
    SolverGrid g;
    g.t_lo = 0.0;
    g.t_hi = 1.0;
    g.time_points = tp;
    g.x_lo = Eigen::VectorXd::Constant(2, -pad);
    g.x_hi = Eigen::VectorXd::Constant(2, pad);
    g.points_per_coord = {pts, pts};
    return g;
}

SolverOptions fast_options() {
    SolverOptions opt;
    opt.flow_steps = 64;
    opt.time_quad = 12;
    opt.gh_nodes = 10;
    opt.cov_quad = 16;
    opt.tol = 1e-9;
    opt.max_iter = 10;
    return opt;
}

}  // namespace

TEST_CASE("sampled field: multilinear interpolation and grid derivatives") {
    SampledField f({0.0, 1.0}, Eigen::VectorXd::Constant(2, -1.0),
                   Eigen::VectorXd::Constant(2, 1.0), {9, 9});
    for (int ti = 0; ti < 2; ++ti)
        for (long k = 0; k < f.space_size(); ++k) {
            const Eigen::VectorXd x = f.coordinates_flat(k);
            f.at(ti, k) = (1.0 + ti) * (2.0 * x[0] - 3.0 * x[1] + 0.5);
        }
    // multilinear interp is exact on affine data, linear in t
    CHECK(f.value(0.5, vec2(0.31, -0.47)) ==
          doctest::Approx(1.5 * (2.0 * 0.31 + 3.0 * 0.47 + 0.5)).epsilon(1e-12));
    long clamped = 0;
    f.value(0.0, vec2(5.0, 0.0), &clamped);
    CHECK(clamped == 1);
    const SampledField d0 = f.derivative(0);
    CHECK(d0.value(0.0, vec2(0.1, 0.2)) == doctest::Approx(2.0).epsilon(1e-10));
    const SampledField d1 = f.derivative(1);
    CHECK(d1.value(1.0, vec2(0.1, 0.2)) == doctest::Approx(-6.0).epsilon(1e-10));
}

TEST_CASE("sampled field: binary round trip and csv header") {
    SampledField f({0.0, 0.5, 1.0}, Eigen::VectorXd::Constant(2, -1.0),
                   Eigen::VectorXd::Constant(2, 1.0), {5, 7});
    for (int ti = 0; ti < 3; ++ti)
        for (long k = 0; k < f.space_size(); ++k) f.at(ti, k) = std::sin(ti + 0.3 * k);
    f.save_binary("field_roundtrip.bin");
    const SampledField g = SampledField::load_binary("field_roundtrip.bin");
    CHECK(g.max_abs_diff(f) == 0.0);
    f.save_csv("field_roundtrip.csv");
    std::FILE* h = std::fopen("field_roundtrip.csv", "rb");
    REQUIRE(h);
    char line[64];
    REQUIRE(std::fgets(line, sizeof line, h));
    CHECK(std::string(line) == "t,x1,x2,u\n");
    std::fclose(h);
}

TEST_CASE("frozen semigroup: normalization, mean, second moment") {
    const ChainProblem p = make_catalog_problem("kinetic_nonlinear", dims);
    const Eigen::VectorXd x = vec2(0.2, -0.3);
    FrozenProxy proxy(p, 0.0, x, 64);
    const double one =
        frozen_semigroup_apply(proxy, [](const Eigen::VectorXd&) { return 1.0; }, 0.0, 0.6, x);
    CHECK(one == doctest::Approx(1.0).epsilon(1e-8));
    const FrozenProxy::GaussianSlice slice = proxy.slice(0.0, 0.6);
    const Eigen::VectorXd m = slice.mean(x);
    const Eigen::VectorXd c = vec2(0.7, -1.4);
    const double lin = frozen_semigroup_apply(
        proxy, [&](const Eigen::VectorXd& y) { return c.dot(y); }, 0.0, 0.6, x);
    CHECK(lin == doctest::Approx(c.dot(m)).epsilon(1e-8));
    const double sq = frozen_semigroup_apply(
        proxy, [](const Eigen::VectorXd& y) { return y[0] * y[0]; }, 0.0, 0.6, x);
    CHECK(sq == doctest::Approx(m[0] * m[0] + slice.covariance(0, 0)).epsilon(1e-8));
}

TEST_CASE("green kernel: constants, zero, and the chain mean integral") {
    const ChainProblem p = make_catalog_problem("l0", dims);
    const Eigen::VectorXd x = vec2(1.0, 0.0);
    FrozenProxy proxy(p, 0.0, x, 64);
    const double c1 = green_apply(
        proxy, [](double, const Eigen::VectorXd&) { return 1.0; }, 0.0, 0.2, 0.9, x);
    CHECK(c1 == doctest::Approx(0.7).epsilon(1e-8));
    const double c0 = green_apply(
        proxy, [](double, const Eigen::VectorXd&) { return 0.0; }, 0.0, 0.0, 0.9, x);
    CHECK(c0 == doctest::Approx(0.0));
    // f = y1: the first block's mean is constant along the chain flow
    const double mean_int = green_apply(
        proxy, [](double, const Eigen::VectorXd& y) { return y[0]; }, 0.0, 0.0, 0.8, x);
    CHECK(mean_int == doctest::Approx(0.8 * 1.0).epsilon(1e-8));
    CHECK_THROWS(green_apply(
        proxy, [](double, const Eigen::VectorXd&) { return 0.0; }, 0.0, 0.9, 0.2, x));
}

TEST_CASE("perturbation residual: proxy model vanishes exactly") {
    const ChainProblem p = make_catalog_problem("l0", dims);
    SampledField u({0.0, 0.5, 1.0}, Eigen::VectorXd::Constant(2, -2.0),
                   Eigen::VectorXd::Constant(2, 2.0), {17, 17});
    for (int ti = 0; ti < 3; ++ti)
        for (long k = 0; k < u.space_size(); ++k) {
            const Eigen::VectorXd x = u.coordinates_flat(k);
            u.at(ti, k) = std::sin(x[0]) * std::cos(0.5 * x[1]) + 0.1 * ti;
        }
    FrozenProxy proxy(p, 0.0, vec2(0.3, -0.4), 64);
    const PerturbationTerms terms =
        perturbation_residual(p, proxy, u, 0.4, vec2(0.4, 0.1));
    CHECK(terms.delta1 == 0.0);
    REQUIRE(terms.delta_i.size() == 1);
    CHECK(terms.delta_i[0] == 0.0);
    // coincident arguments: every difference term vanishes
    const Eigen::VectorXd theta = proxy.flow(0.4);
    const ChainProblem kin = make_catalog_problem("kinetic_nonlinear", dims);
    FrozenProxy kproxy(kin, 0.0, vec2(0.3, -0.4), 64);
    const Eigen::VectorXd ktheta = kproxy.flow(0.4);
    if (u.strictly_interior(ktheta)) {
        const PerturbationTerms at_theta = perturbation_residual(kin, kproxy, u, 0.4, ktheta);
        CHECK(std::abs(at_theta.delta1) < 1e-12);
        CHECK(std::abs(at_theta.delta_i[0]) < 1e-12);
    }
    (void)theta;
    CHECK_THROWS(perturbation_residual(p, proxy, u, 0.4, vec2(1.999, 0.0)));
}

TEST_CASE("perturbation residual: independent term-by-term assembly") {
    const ChainProblem p = make_catalog_problem("kinetic_nonlinear", dims);
    SampledField u({0.0, 0.5, 1.0}, Eigen::VectorXd::Constant(2, -2.0),
                   Eigen::VectorXd::Constant(2, 2.0), {21, 21});
    for (int ti = 0; ti < 3; ++ti)
        for (long k = 0; k < u.space_size(); ++k) {
            const Eigen::VectorXd x = u.coordinates_flat(k);
            u.at(ti, k) = std::exp(-0.2 * x.squaredNorm()) + 0.05 * ti * x[0];
        }
    const double s = 0.45;
    const Eigen::VectorXd y = vec2(0.6, -0.5);
    FrozenProxy proxy(p, 0.0, vec2(0.1, 0.2), 64);
    const PerturbationTerms terms = perturbation_residual(p, proxy, u, s, y);

    // oracle: assemble <F1(y)-F1(th), D1 u> + 1/2 (a(y)-a(th)) D11 u
    //         + <F2(y)-F2(th)-D_{x1}F2(th)(y-th)_1, D2 u> from scratch
    const Eigen::VectorXd theta = proxy.flow(s);
    const FieldDerivatives derivs = build_field_derivatives(u, dims);
    const double d1u = derivs.d1[0].value(s, y);
    const double d11u = derivs.d2[0].value(s, y);
    const double d2u = derivs.d_deg[0].value(s, y);
    const double f1_gap = p.drift[0].eval(s, y)[0] - p.drift[0].eval(s, theta)[0];
    const double a_gap = p.diffusion_a(s, y)(0, 0) - p.diffusion_a(s, theta)(0, 0);
    const double j = p.drift_subdiagonal_jacobian(s, theta)(1, 0);
    const double f2_rem = p.drift[1].eval(s, y)[0] - p.drift[1].eval(s, theta)[0] -
                          j * (y[0] - theta[0]);
    const double oracle = f1_gap * d1u + 0.5 * a_gap * d11u + f2_rem * d2u;
    CHECK(std::abs(terms.total() - oracle) < 1e-10);
}

TEST_CASE("parametrix solve: proxy model converges in one exact iteration") {
    const ChainProblem p = make_catalog_problem("l0", dims);  // terminal x2 by default
    const SolveResult res = parametrix_solve(p, small_grid(), fast_options());
    CHECK(res.converged);
    CHECK(res.iterations == 1);
    REQUIRE(res.sup_changes.size() == 1);
    CHECK(res.sup_changes[0] < 1e-8);
    // closed form: u(t,x) = x2 + x1 (T - t); check interior nodes
    double worst = 0.0;
    const SampledField& u = res.u;
    for (int ti = 0; ti < u.time_points(); ++ti)
        for (long k = 0; k < u.space_size(); ++k) {
            const Eigen::VectorXd x = u.coordinates_flat(k);
            if (!u.strictly_interior(x, 2)) continue;
            const double t = u.times()[static_cast<size_t>(ti)];
            worst = std::max(worst, std::abs(u.at(ti, k) - (x[1] + x[0] * (1.0 - t))));
        }
    CHECK(worst < 1e-4);
    CHECK(worst < 1e-10);  // nilpotent chain: exact up to quadrature roundoff
    // terminal row equals g on the grid exactly
    for (long k = 0; k < u.space_size(); ++k)
        CHECK(u.at(u.time_points() - 1, k) == u.coordinates_flat(k)[1]);
}

TEST_CASE("parametrix solve: nonlinear kinetic problem contracts and matches MC") {
    const ChainProblem p = make_catalog_problem("kinetic_nonlinear", dims);
    const SolveResult res = parametrix_solve(p, small_grid(1.6, 15, 4), fast_options());
    CHECK(res.converged);
    // small-horizon contraction: consecutive sup-changes decrease
    for (size_t k = 1; k < res.sup_changes.size(); ++k)
        if (res.sup_changes[k - 1] > 1e-12)
            CHECK(res.sup_changes[k] < res.sup_changes[k - 1]);

    McConfig mc;
    mc.paths = 40000;
    mc.steps = 400;
    mc.seed = 1234;
    const Eigen::VectorXd probe = vec2(0.2, -0.1);
    const FkResult fk = fk_estimate(p, 0.0, probe, mc);
    const double grid_value = res.u.value(0.0, probe);
    CHECK(std::abs(grid_value - fk.estimate) < fk.halfwidth + 5e-3);
}

TEST_CASE("parametrix solve: grid refinement shrinks the probe delta") {
    // measures the grid-error budget used by the oracle-equivalence criterion
    const ChainProblem p = make_catalog_problem("kinetic_nonlinear", dims);
    const SolveResult coarse = parametrix_solve(p, small_grid(1.6, 11, 3), fast_options());
    const SolveResult fine = parametrix_solve(p, small_grid(1.6, 17, 5), fast_options());
    double delta = 0.0;
    for (double a : {-0.3, 0.0, 0.3})
        for (double b : {-0.3, 0.0, 0.3})
            delta = std::max(delta, std::abs(coarse.u.value(0.0, vec2(a, b)) -
                                             fine.u.value(0.0, vec2(a, b))));
    CHECK(delta < 5e-3);  // the acceptance budget (1.5e-2) is 3x this measurement
}

TEST_CASE("parametrix solve: precondition failures throw") {
    ChainProblem p = make_catalog_problem("l0", dims);
    p.drift[1].eval = [](double, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); };
    p.drift[1].depends_on = {};
    p.drift_is_affine = false;
    CHECK_THROWS(parametrix_solve(p, small_grid(), fast_options()));  // Hormander fails
    SolverGrid bad = small_grid();
    bad.t_hi = 0.7;  // horizon mismatch
    CHECK_THROWS(parametrix_solve(make_catalog_problem("l0", dims), bad, fast_options()));
}

TEST_CASE("regime split: coincident points and the changeover formula") {
    const ChainProblem p = make_catalog_problem("kinetic_nonlinear", dims);
    const SolveResult res = parametrix_solve(p, small_grid(1.6, 13, 4), fast_options());
    const Eigen::VectorXd x = vec2(0.2, 0.1);
    const RegimeSplitReport same =
        regime_split_expand(p, res.u, 0.0, x, x, 0.25, fast_options());
    CHECK(same.t0 == 0.0);
    CHECK(same.off_diag == 0.0);
    CHECK(same.discontinuity == 0.0);
    // t0 = t + c0 d^2(x, x'): engineered distance 0.2
    Eigen::VectorXd xp = x;
    xp[0] += 0.04;  // d = |dx1|^1 = 0.04... plus block-2 zero: d = 0.04
    const double dist = quasi_distance(x, xp, dims);
    const RegimeSplitReport rep =
        regime_split_expand(p, res.u, 0.0, x, xp, 0.25, fast_options());
    CHECK(rep.t0 == doctest::Approx(0.25 * dist * dist));
    CHECK(rep.discontinuity_ratio >= 0.0);
    CHECK(rep.off_diag_ratio >= 0.0);
    CHECK(std::isfinite(rep.diag_ratio));
}

TEST_CASE("time chaining: single segment identical, proxy model chain exact") {
    const ChainProblem p = make_catalog_problem("l0", dims);
    const SolverGrid grid = small_grid();
    const SolverOptions opt = fast_options();
    const SolveResult direct = parametrix_solve(p, grid, opt);
    const ChainedSolveResult n1 = time_chained_solve(p, 1, grid, opt);
    CHECK(n1.u.max_abs_diff(direct.u) == 0.0);
    const ChainedSolveResult n4 = time_chained_solve(p, 4, grid, opt);
    // compare on the common coarse probe set
    double worst = 0.0;
    for (double t : {0.0, 1.0 / 3, 2.0 / 3})
        for (double a : {-0.6, 0.0, 0.6})
            for (double b : {-0.6, 0.0, 0.6})
                worst = std::max(worst, std::abs(n4.u.value(t, vec2(a, b)) -
                                                 direct.u.value(t, vec2(a, b))));
    CHECK(worst < 1e-6);
    CHECK_THROWS(time_chained_solve(p, 0, grid, opt));
}
