#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "schauder/holder.hpp"

using namespace schauder;

namespace {
const ChainDims dims{2, 1, 0.5, 1.0};

Box unit_box() {
    Box b;
    b.lo = Eigen::VectorXd::Constant(2, -1.0);
    b.hi = Eigen::VectorXd::Constant(2, 1.0);
    return b;
}

// Brute-force directional seminorm oracle on a dense pair grid.
double brute_force_seminorm(const std::function<double(double, double)>& f, int direction,
                            double alpha, int npts) {
    double best = 0.0;
    for (int i = 0; i < npts; ++i)
        for (int j = 0; j < npts; ++j) {
            const double a = -1.0 + 2.0 * i / (npts - 1);
            const double b = -1.0 + 2.0 * j / (npts - 1);
            if (std::abs(a - b) < 1e-6) continue;
            const double fa = direction == 1 ? f(a, 0.3) : f(0.3, a);
            const double fb = direction == 1 ? f(b, 0.3) : f(0.3, b);
            best = std::max(best, std::abs(fa - fb) / std::pow(std::abs(a - b), alpha));
        }
    return best;
}

}  // namespace

TEST_CASE("constant field: zero seminorms, cb-norm is n * sup") {
    const ScalarField f = [](const Eigen::VectorXd&) { return 5.0; };
    const auto rep = holder_norm_anisotropic(f, dims, 0, unit_box(), 400, 3);
    CHECK(rep.sup_norm == doctest::Approx(5.0));
    for (const auto& dir : rep.directions) {
        CHECK(dir.seminorm == 0.0);
        CHECK(dir.cb_norm() == doctest::Approx(5.0));
    }
    CHECK(rep.cb_total == doctest::Approx(10.0));
    CHECK(rep.homogeneous_sum == doctest::Approx(0.0));
}

TEST_CASE("linear field x1: direction-1 seminorm matches the pair-grid oracle") {
    const ScalarField f = [](const Eigen::VectorXd& x) { return x[0]; };
    // oracle: max |a-b| / |a-b|^{1/2} = max |a-b|^{1/2} = sqrt(2) on [-1,1]
    const double oracle = brute_force_seminorm(
        [](double x1, double x2) { (void)x2; return x1; }, 1, 0.5, 201);
    CHECK(oracle == doctest::Approx(std::sqrt(2.0)).epsilon(1e-2));
    const auto rep = holder_norm_anisotropic(f, dims, 0, unit_box(), 3000, 5);
    CHECK(rep.directions[0].seminorm == doctest::Approx(oracle).epsilon(0.03));
    CHECK(rep.directions[1].seminorm == doctest::Approx(0.0));
}

TEST_CASE("zero field gives zero norm") {
    const ScalarField f = [](const Eigen::VectorXd&) { return 0.0; };
    const auto rep = holder_norm_anisotropic(f, dims, 0, unit_box(), 100, 1);
    CHECK(rep.cb_total == 0.0);
}

TEST_CASE("rough |x|^gamma field: seminorm close to one at matching exponent") {
    ChainDims d1{1, 1, 0.5, 1.0};
    Box box;
    box.lo = Eigen::VectorXd::Constant(1, -1.0);
    box.hi = Eigen::VectorXd::Constant(1, 1.0);
    const ScalarField f = [](const Eigen::VectorXd& x) {
        return std::sqrt(std::abs(x[0]));
    };
    const auto rep = holder_norm_anisotropic(f, d1, 0, box, 4000, 9);
    // [|x|^{1/2}]_{1/2} = 1, attained when one endpoint sits at the kink
    CHECK(rep.directions[0].seminorm == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("order-2 norm of a quadratic is exact up to fd error") {
    ChainDims d1{1, 1, 0.5, 1.0};
    Box box;
    box.lo = Eigen::VectorXd::Constant(1, -1.0);
    box.hi = Eigen::VectorXd::Constant(1, 1.0);
    const ScalarField f = [](const Eigen::VectorXd& x) { return x[0] * x[0]; };
    const auto rep = holder_norm_anisotropic(f, d1, 2, box, 1500, 7);
    const auto& dir = rep.directions[0];
    CHECK(dir.sup_value == doctest::Approx(1.0).epsilon(0.02));        // sup x^2
    CHECK(dir.derivative_sups[0] == doctest::Approx(2.0).epsilon(0.02));  // sup |2x|
    CHECK(dir.derivative_sups[1] == doctest::Approx(2.0).epsilon(0.02));  // f'' = 2
    CHECK(dir.seminorm == doctest::Approx(0.0).epsilon(1e-4));         // f'' constant
}

TEST_CASE("monotone under restriction of the sample set") {
    const ScalarField f = [](const Eigen::VectorXd& x) {
        return std::sin(3.0 * x[0]) + 0.3 * std::cos(2.0 * x[1]);
    };
    const VectorField vf = as_vector_field(f);
    const Box big = unit_box();
    Box small;
    small.lo = Eigen::VectorXd::Constant(2, -0.5);
    small.hi = Eigen::VectorXd::Constant(2, 0.5);
    const auto events = make_direction_events(dims, 1, big, 600, 17);
    std::vector<DirectionEvent> restricted;
    for (const auto& ev : events)
        if (small.contains(ev.p) && small.contains(ev.q)) restricted.push_back(ev);
    REQUIRE(restricted.size() > 10);
    const auto full = holder_directional_from_events(vf, dims, 1, 0.5, events, 2.0 / 256);
    const auto sub = holder_directional_from_events(vf, dims, 1, 0.5, restricted, 2.0 / 256);
    CHECK(sub.seminorm <= full.seminorm + 1e-12);
    CHECK(sub.sup_value <= full.sup_value + 1e-12);
}

TEST_CASE("configuration errors") {
    const ScalarField f = [](const Eigen::VectorXd&) { return 0.0; };
    CHECK_THROWS(holder_norm_anisotropic(f, dims, 0, unit_box(), 1, 0));
    CHECK_THROWS(holder_norm_anisotropic(f, dims, 1, unit_box(), 10, 0));
    Box empty;
    empty.lo = Eigen::VectorXd::Constant(2, 1.0);
    empty.hi = Eigen::VectorXd::Constant(2, -1.0);
    CHECK_THROWS(holder_norm_anisotropic(f, dims, 0, empty, 10, 0));
}
