#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "schauder/model.hpp"
#include "schauder/quadrature.hpp"

using namespace schauder;

namespace {

const ChainDims kinetic_dims{2, 1, 0.5, 1.0};

Box sym_box(int nd, double r) {
    Box b;
    b.lo = Eigen::VectorXd::Constant(nd, -r);
    b.hi = Eigen::VectorXd::Constant(nd, r);
    return b;
}

ChainProblem custom_problem(const ChainDims& dims, DriftFn f2, MatrixFn a) {
    ChainProblem p = make_catalog_problem("l0", dims);
    if (f2) {
        p.drift[1].eval = std::move(f2);
        p.drift[1].depends_on = {0, 1};
        p.drift_is_affine = false;
    }
    if (a) {
        p.diffusion_a = std::move(a);
        p.a_depends_on = {0};
        p.a_is_constant = false;
        const MatrixFn afn = p.diffusion_a;
        p.sigma = [afn](double t, const Eigen::VectorXd& x) {
            Eigen::MatrixXd s(1, 1);
            s(0, 0) = std::sqrt(afn(t, x)(0, 0));
            return s;
        };
    }
    return p;
}

}  // namespace

TEST_CASE("identity diffusion: kappa = 1, pass") {
    const ChainProblem p = make_catalog_problem("l0", kinetic_dims);
    const UeReport rep = check_uniform_ellipticity(p, sym_box(2, 1.0), 128, 5);
    CHECK(rep.kappa_hat == doctest::Approx(1.0));
    CHECK(rep.pass);
    CHECK_FALSE(rep.bounded_violation);
}

TEST_CASE("diagonal diffusion eigenvalues read off") {
    ChainDims dims{1, 2, 0.5, 1.0};
    ChainProblem p = make_catalog_problem("brownian", dims);
    p.diffusion_a = [](double, const Eigen::VectorXd&) {
        Eigen::MatrixXd a(2, 2);
        a << 2.0, 0.0, 0.0, 0.5;
        return a;
    };
    const UeReport rep = check_uniform_ellipticity(p, sym_box(2, 1.0), 64, 5);
    CHECK(rep.kappa_hat == doctest::Approx(2.0));
    CHECK(rep.pass);
}

TEST_CASE("unbounded diffusion flagged against the cap") {
    ChainProblem p = custom_problem(kinetic_dims, nullptr,
                                    [](double, const Eigen::VectorXd& x) {
                                        return ((1.0 + x[0] * x[0]) *
                                                Eigen::MatrixXd::Identity(1, 1))
                                            .eval();
                                    });
    const UeReport rep = check_uniform_ellipticity(p, sym_box(2, 10.0), 256, 5, /*cap=*/50.0);
    CHECK(rep.pass);  // still elliptic at every sample
    CHECK(rep.bounded_violation);
}

TEST_CASE("hormander: identity subdiagonal passes with unit singular value") {
    const ChainProblem p = make_catalog_problem("l0", kinetic_dims);
    const HormanderReport rep = check_hormander(p, sym_box(2, 1.0), 64, 5);
    CHECK(rep.pass);
    REQUIRE(rep.min_singular_values.size() == 1);
    CHECK(rep.min_singular_values[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("hormander: zero transmission fails") {
    ChainProblem p = custom_problem(
        kinetic_dims,
        [](double, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); }, nullptr);
    const HormanderReport rep = check_hormander(p, sym_box(2, 1.0), 64, 5);
    CHECK_FALSE(rep.pass);
    CHECK(rep.min_singular_values[0] == doctest::Approx(0.0));
}

TEST_CASE("hormander: cosine transmission fails when sampled at the zero") {
    ChainProblem p = custom_problem(
        kinetic_dims,
        [](double, const Eigen::VectorXd& x) {
            Eigen::VectorXd v(1);
            v[0] = std::sin(x[0]) + x[1];
            return v;
        },
        nullptr);
    Box pinned;  // every sample sits at x1 = pi/2 where d/dx1 sin = 0
    pinned.lo = Eigen::VectorXd::Constant(2, 0.0);
    pinned.hi = Eigen::VectorXd::Constant(2, 1.0);
    pinned.lo[0] = M_PI / 2;
    pinned.hi[0] = M_PI / 2 + 1e-12;
    const HormanderReport rep = check_hormander(p, pinned, 32, 5);
    CHECK_FALSE(rep.pass);
    CHECK(rep.min_singular_values[0] < 1e-6);
    // n = 1 is a vacuous pass
    const ChainProblem b = make_catalog_problem("brownian", ChainDims{1, 1, 0.5, 1.0});
    CHECK(check_hormander(b, sym_box(1, 1.0), 16, 5).pass);
}

TEST_CASE("drift regularity: linear drift has zero gradient seminorm") {
    const ChainProblem p = make_catalog_problem("l0", kinetic_dims);
    const DriftRegularityReport rep = check_drift_regularity(p, sym_box(2, 1.0), 128, 5);
    for (const auto& m : rep.moduli) {
        CHECK(m.seminorm < 1e-9);
        CHECK_FALSE(m.growing);
    }
}

TEST_CASE("drift regularity: |x|^gamma has unit seminorm at its own exponent") {
    ChainDims d1{1, 1, 0.5, 1.0};
    ChainProblem p = make_catalog_problem("brownian", d1);
    p.drift[0].eval = [](double, const Eigen::VectorXd& x) {
        Eigen::VectorXd v(1);
        v[0] = std::pow(std::abs(x[0]), 0.5);
        return v;
    };
    p.drift[0].depends_on = {0};
    p.drift_is_affine = false;
    const DriftRegularityReport rep = check_drift_regularity(p, sym_box(1, 1.0), 3000, 9);
    REQUIRE(rep.moduli.size() == 1);
    CHECK(rep.moduli[0].exponent == doctest::Approx(0.5));
    CHECK(rep.moduli[0].seminorm == doctest::Approx(1.0).epsilon(0.06));
}

TEST_CASE("catalog problems: sigma reconstruction and structure") {
    for (const std::string& name :
         {"l0", "ou_perturbed", "kinetic_nonlinear", "kinetic_rough", "rough_drift",
          "sawtooth_a"}) {
        const ChainProblem p = make_catalog_problem(name, kinetic_dims);
        const ProblemValidation val = validate_problem(p, sym_box(2, 1.5), 1000, 5);
        INFO(name);
        CHECK(val.sigma_reconstruction_error < 1e-10);
        CHECK(val.structure_violation < 1e-12);
        CHECK(val.pass);
    }
    // three-level chain exercises the structural independence check
    const ChainProblem p3 = make_catalog_problem("l0", ChainDims{3, 1, 0.5, 1.0});
    CHECK(validate_problem(p3, sym_box(3, 1.0), 200, 5).pass);
    CHECK_THROWS(make_catalog_problem("unknown_name", kinetic_dims));
}

TEST_CASE("mollifier bump: unit mass, compact support, nonnegative") {
    Mollifier mol;
    mol.m = 4;
    const QuadratureRule rule = gauss_legendre(96, -1.0, 1.0);
    double mass = 0.0;
    for (int q = 0; q < rule.nodes.size(); ++q) mass += rule.weights[q] * mol.bump(rule.nodes[q]);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(mol.bump(1.0) == 0.0);
    CHECK(mol.bump(-1.00001) == 0.0);
    CHECK(mol.bump(0.3) > 0.0);
}

TEST_CASE("mollify: constants and linear maps are invariant") {
    const ChainProblem p = make_catalog_problem("l0", kinetic_dims);
    Mollifier mol;
    mol.m = 8;
    const ChainProblem pm = mollify(p, mol);
    Eigen::VectorXd x(2);
    x << 0.37, -0.81;
    // constant a
    CHECK(pm.diffusion_a(0.2, x)(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
    // linear F2: odd kernel moments vanish
    CHECK(pm.drift[1].eval(0.2, x)[0] == doctest::Approx(x[0]).epsilon(1e-12));
    CHECK(pm.drift[0].eval(0.2, x).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("mollify: sawtooth diffusion error decreases with the level") {
    const ChainProblem p = make_catalog_problem("sawtooth_a", kinetic_dims);
    Mollifier m4, m16;
    m4.m = 4;
    m16.m = 16;
    const ChainProblem p4 = mollify(p, m4);
    const ChainProblem p16 = mollify(p, m16);
    double err4 = 0.0, err16 = 0.0;
    for (int k = 0; k < 200; ++k) {
        Eigen::VectorXd x(2);
        x << -1.0 + 2.0 * k / 199.0, 0.0;
        const double base = p.diffusion_a(0.0, x)(0, 0);
        err4 = std::max(err4, std::abs(p4.diffusion_a(0.0, x)(0, 0) - base));
        err16 = std::max(err16, std::abs(p16.diffusion_a(0.0, x)(0, 0) - base));
    }
    CHECK(err16 < err4);
    CHECK(err4 > 1e-4);  // the kink is actually smoothed
}

TEST_CASE("mollification never increases the directional seminorm") {
    const ChainProblem p = make_catalog_problem("kinetic_rough", kinetic_dims);
    Mollifier mol;
    mol.m = 8;
    const ChainProblem pm = mollify(p, mol);
    const auto events = make_direction_events(kinetic_dims, 2, sym_box(2, 1.0), 400, 23);
    const double alpha = (1.0 + kinetic_dims.gamma) / 3.0;
    auto dir_norm = [&](const ChainProblem& prob) {
        const DriftFn& f2 = prob.drift[1].eval;
        VectorField field = [&f2](const Eigen::VectorXd& x) { return f2(0.3, x); };
        return holder_directional_from_events(field, kinetic_dims, 2, alpha, events, 2.0 / 256)
            .seminorm;
    };
    CHECK(dir_norm(pm) <= dir_norm(p) + 1e-6);
}

TEST_CASE("mollified problems keep the hormander pass") {
    const ChainProblem p = make_catalog_problem("kinetic_rough", kinetic_dims);
    REQUIRE(check_hormander(p, sym_box(2, 1.0), 64, 5).pass);
    for (int m : {8, 16, 32}) {
        Mollifier mol;
        mol.m = m;
        const ChainProblem pm = mollify(p, mol);
        INFO("m = " << m);
        CHECK(check_hormander(pm, sym_box(2, 1.0), 64, 5).pass);
    }
}

TEST_CASE("mollify budget and precondition errors") {
    const ChainProblem p = make_catalog_problem("kinetic_rough", kinetic_dims);
    Mollifier mol;
    mol.m = 8;
    MollifyOptions bad;
    bad.quad_points = 4;
    CHECK_THROWS(mollify(p, mol, bad));
    MollifyOptions tiny_budget;
    tiny_budget.budget = 10;
    CHECK_THROWS(mollify(p, mol, tiny_budget));
}
