#include <cmath>

#include "doctest.h"
#include "landis/beltrami.hpp"

using namespace landis;

TEST_CASE("eta and nu vanish for the identity") {
    auto [eta, nu] = eta_nu(Mat2{});
    CHECK(std::abs(eta) == 0.0);
    CHECK(std::abs(nu) == 0.0);
}

TEST_CASE("the three forms of D agree") {
    auto s = GridSpec::centered(1.0, 64);
    auto A = CoefficientField::sample(CoefficientFamily::trig(0.5, 1.0, 4, true), s);
    auto f = ComplexField::from_function(s, [](Complex z) { return std::sin(z) + 0.3 * std::conj(z) * z; });
    auto d0 = apply_D(A, f, DForm::definition);
    auto d1 = apply_D(A, f, DForm::expanded);
    auto d2 = apply_D(A, f, DForm::det_one);
    CHECK((d0 - d1).max_abs() < 1e-12 * (1 + d0.max_abs()));
    CHECK((d0 - d2).max_abs() < 1e-12 * (1 + d0.max_abs()));
}

TEST_CASE("hat matrix has unit determinant") {
    Mat2 m = hat_matrix(0.2, -0.3);
    CHECK(m.det() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(hat_matrix(0.0, 0.0).a12 == 0.0);
}

TEST_CASE("constant hat operator sample is annihilated") {
    auto s = GridSpec::centered(1.0, 64);
    HatOperator H{ScalarField(s, 0.2), ScalarField(s, -0.1), 0.5};
    auto smp = hat_holomorphic_sample(H, ScalarField::from_function(s, [](double x, double y) { return x + 2 * y; }));
    CHECK(smp.residual < 1e-10);
    CHECK(smp.loop_defect < 1e-10);
}

TEST_CASE("integrate_gradient recovers a potential") {
    auto s = GridSpec::centered(1.0, 32);
    auto gx = ScalarField::from_function(s, [](double x, double y) { return 2 * x + y; });
    auto gy = ScalarField::from_function(s, [](double x, double) { return x; });
    auto v = integrate_gradient(gx, gy, 16, 16);
    CHECK(v(20, 8) == doctest::Approx(0.25 * 0.25 - 0.25 * 0.5).epsilon(1e-12));
    CHECK(loop_defect(gx, gy, 20, 3) < 1e-12);
}

TEST_CASE("decomposition refuses determinant other than one") {
    auto s = GridSpec::centered(1.0, 8);
    auto A = CoefficientField::sample(CoefficientFamily::constant({2.0, 0.0, 1.0}, 0.4), s);
    CHECK_THROWS_AS(decompose_L(A), HypothesisError);
}
