#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "schauder/anisotropy.hpp"
#include "schauder/quadrature.hpp"

using namespace schauder;

namespace {
ChainDims dims_n2{2, 1, 0.5, 1.0};

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}
}  // namespace

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    const QuadratureRule rule = gauss_legendre(6, 0.0, 2.0);
    double acc = 0.0, acc_poly = 0.0;
    for (int q = 0; q < rule.nodes.size(); ++q) {
        acc += rule.weights[q];
        const double x = rule.nodes[q];
        acc_poly += rule.weights[q] * (x * x * x * x * x - 3.0 * x * x);
    }
    CHECK(acc == doctest::Approx(2.0).epsilon(1e-14));
    // int_0^2 x^5 - 3x^2 dx = 64/6 - 8
    CHECK(acc_poly == doctest::Approx(64.0 / 6.0 - 8.0).epsilon(1e-13));
}

TEST_CASE("gauss-hermite matches normal moments") {
    const QuadratureRule rule = gauss_hermite(20);
    const double m2 = gauss_hermite_expectation(rule, 1, [](const Eigen::VectorXd& z) {
        return z[0] * z[0];
    });
    const double m4 = gauss_hermite_expectation(rule, 1, [](const Eigen::VectorXd& z) {
        return z[0] * z[0] * z[0] * z[0];
    });
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("scale matrix diagonal powers") {
    CHECK(scale_matrix_apply(2.0, vec2(1.0, 1.0), dims_n2) == vec2(2.0, 4.0));
    CHECK(scale_matrix_apply(1.0, vec2(0.3, -2.0), dims_n2) == vec2(0.3, -2.0));
    ChainDims d3{3, 1, 0.5, 1.0};
    Eigen::VectorXd v(3);
    v << 1.0, 0.0, 2.0;
    Eigen::VectorXd expectv(3);
    expectv << 3.0, 0.0, 54.0;
    CHECK((scale_matrix_apply(3.0, v, d3) - expectv).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("scale matrix inverse recovers input and group law holds") {
    const Eigen::VectorXd v = vec2(0.7, -1.3);
    const Eigen::VectorXd w = scale_matrix_apply(1.7, v, dims_n2);
    CHECK((scale_matrix_apply(1.7, w, dims_n2, true) - v).cwiseAbs().maxCoeff() < 1e-14);
    const Eigen::VectorXd ab = scale_matrix_apply(1.3, scale_matrix_apply(2.1, v, dims_n2), dims_n2);
    const Eigen::VectorXd prod = scale_matrix_apply(1.3 * 2.1, v, dims_n2);
    CHECK((ab - prod).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(scale_matrix_apply(-1.0, v, dims_n2), std::domain_error);
}

TEST_CASE("quasi distance block exponents") {
    CHECK(quasi_distance(vec2(0, 0), vec2(1, 1), dims_n2) == doctest::Approx(2.0));
    CHECK(quasi_distance(vec2(0.4, -2.0), vec2(0.4, -2.0), dims_n2) == 0.0);
    CHECK(quasi_distance(vec2(0, 0), vec2(0, 8), dims_n2) == doctest::Approx(2.0));
    // symmetry
    const Eigen::VectorXd a = vec2(0.3, -0.8), b = vec2(-1.1, 0.2);
    CHECK(quasi_distance(a, b, dims_n2) == doctest::Approx(quasi_distance(b, a, dims_n2)));
}

TEST_CASE("parabolic distance and ordering error") {
    SpaceTimePoint p{0.0, vec2(0, 0)}, q{0.25, vec2(0, 0)};
    CHECK(parabolic_distance(p, q, dims_n2) == doctest::Approx(0.5));
    CHECK(parabolic_distance(p, p, dims_n2) == 0.0);
    SpaceTimePoint r{1.0, vec2(1, 1)};
    CHECK(parabolic_distance(p, r, dims_n2) == doctest::Approx(3.0));
    CHECK_THROWS(parabolic_distance(q, p, dims_n2));
}

TEST_CASE("dilation exponent table and homogeneity") {
    SpaceTimePoint p{1.0, vec2(1, 1)};
    const SpaceTimePoint dp = dilate(2.0, p, dims_n2);
    CHECK(dp.t == doctest::Approx(4.0));
    CHECK(dp.x[0] == doctest::Approx(2.0));
    CHECK(dp.x[1] == doctest::Approx(8.0));
    const SpaceTimePoint idp = dilate(1.0, p, dims_n2);
    CHECK(idp.t == p.t);
    CHECK((idp.x - p.x).cwiseAbs().maxCoeff() == 0.0);

    // d_P(dil l p, dil l q) = l d_P(p, q) across a lambda sweep
    SpaceTimePoint a{0.1, vec2(0.7, -0.4)}, b{0.9, vec2(-0.2, 1.3)};
    const double base = parabolic_distance(a, b, dims_n2);
    for (double lambda : {0.1, 0.35, 1.0, 4.2, 10.0}) {
        const double scaled =
            parabolic_distance(dilate(lambda, a, dims_n2), dilate(lambda, b, dims_n2), dims_n2);
        CHECK(std::abs(scaled - lambda * base) <= 1e-10 * lambda * base);
    }
    CHECK_THROWS_AS(dilate(0.0, p, dims_n2), std::domain_error);
}

TEST_CASE("quasi-triangle constant is finite and reported") {
    Box box{vec2(-1, -1), vec2(1, 1)};
    const double K = quasi_triangle_constant(dims_n2, box, 500, 11);
    CHECK(K > 0.5);
    CHECK(K < 4.0);  // loose sanity bracket; the exact constant is not asserted
}

TEST_CASE("dims validation") {
    ChainDims bad = dims_n2;
    bad.gamma = 1.5;
    CHECK_THROWS(bad.validate());
    bad = dims_n2;
    bad.n = 0;
    CHECK_THROWS(bad.validate());
    bad = dims_n2;
    bad.n = 7;
    CHECK_THROWS(bad.validate());
}
