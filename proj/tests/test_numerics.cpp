#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "kerrcat/numerics.hpp"

using namespace kerrcat;

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
}

TEST_CASE("brent_root") {
    auto f = [](double x) { return std::cos(x); };
    SUBCASE("finds pi/2") {
        CHECK(brent_root(f, 1.0, 2.0) == doctest::Approx(kPi / 2).epsilon(1e-12));
    }
    SUBCASE("endpoint order does not matter") {
        CHECK(brent_root(f, 2.0, 1.0) == doctest::Approx(kPi / 2).epsilon(1e-12));
    }
    SUBCASE("no sign change throws") {
        CHECK_THROWS_AS(brent_root(f, 0.1, 0.2), SimError);
    }
    SUBCASE("polynomial with steep root") {
        auto g = [](double x) { return (x - 0.3) * (x * x + 1.0); };
        CHECK(brent_root(g, -1.0, 1.0) == doctest::Approx(0.3).epsilon(1e-12));
    }
}

TEST_CASE("brent_minimize") {
    auto f = [](double x) { return (x - 1.7) * (x - 1.7) + 0.25; };
    CHECK(brent_minimize(f, 0.0, 5.0) == doctest::Approx(1.7).epsilon(1e-8));
    auto cosf = [](double x) { return std::cos(x); };
    CHECK(brent_minimize(cosf, 2.0, 4.5) == doctest::Approx(kPi).epsilon(1e-8));
}

TEST_CASE("richardson_derivative orders 1..3 on sin") {
    auto f = [](double x) { return std::sin(x); };
    double x = 0.4;
    CHECK(richardson_derivative(f, x, 1, 0.1) == doctest::Approx(std::cos(x)).epsilon(1e-9));
    CHECK(std::abs(richardson_derivative(f, x, 2, 0.1) - (-std::sin(x))) < 1e-8);
    CHECK(std::abs(richardson_derivative(f, x, 3, 0.1) - (-std::cos(x))) < 1e-7);
}

TEST_CASE("richardson_derivative with an absolute scale accepts exact zeros") {
    // even function plus evaluation noise: the third derivative vanishes at 0,
    // so the finite-difference residue is amplified noise that never settles
    // relative to itself, yet is negligible on the function's natural scale
    auto f = [](double x) { return 100.0 * std::cos(x) + 1e-13 * std::sin(1e4 * x); };
    CHECK_THROWS_AS(richardson_derivative(f, 0.0, 3, 0.1), SimError);
    CHECK(std::abs(richardson_derivative(f, 0.0, 3, 0.1, 1e-7, 1e-4)) < 1e-6);
}

TEST_CASE("richardson_derivative rejects non-smooth input") {
    auto f = [](double x) { return std::abs(x); };
    CHECK_THROWS_AS(richardson_derivative(f, 0.0, 2, 0.1), SimError);
}

TEST_CASE("linear_regression") {
    std::vector<double> x{0, 1, 2, 3, 4}, y;
    for (double xi : x) y.push_back(2.5 * xi - 0.7);
    LinearFit fit = linear_regression(x, y);
    CHECK(fit.slope == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(-0.7).epsilon(1e-10));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    CHECK_THROWS_AS(linear_regression({1.0}, {2.0}), SimError);
}

TEST_CASE("regression_through_origin") {
    std::vector<double> x{1, 2, 3}, y{3.0, 6.0, 9.0};
    CHECK(regression_through_origin(x, y) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("levenberg_marquardt fits an exponential decay") {
    std::vector<double> t, data;
    for (int i = 0; i <= 20; ++i) {
        t.push_back(0.1 * i);
        data.push_back(1.8 * std::exp(-0.9 * 0.1 * i));
    }
    ResidualFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        for (size_t i = 0; i < t.size(); ++i) {
            r(int(i)) = p(0) * std::exp(-p(1) * t[i]) - data[i];
        }
    };
    Eigen::VectorXd p0(2);
    p0 << 1.0, 0.3;
    LMResult res = levenberg_marquardt(fn, p0, int(t.size()));
    CHECK(res.params(0) == doctest::Approx(1.8).epsilon(1e-6));
    CHECK(res.params(1) == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(res.cost < 1e-15);
}

TEST_CASE("parabolic_vertex") {
    // y = (x - 2.3)^2 sampled at 2, 2.5, 3
    auto y = [](double x) { return (x - 2.3) * (x - 2.3); };
    CHECK(parabolic_vertex(2.5, 0.5, y(2.0), y(2.5), y(3.0)) ==
          doctest::Approx(2.3).epsilon(1e-12));
    // collinear points fall back to the center
    CHECK(parabolic_vertex(1.0, 0.5, 0.5, 1.0, 1.5) == doctest::Approx(1.0));
}
