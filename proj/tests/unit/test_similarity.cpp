#include <cmath>

#include "doctest.h"
#include "landis/similarity.hpp"

using namespace landis;

TEST_CASE("contraction precondition is enforced") {
    auto s = GridSpec::centered(1.1, 16);
    DomainMask mask(s, Ball{{0, 0}, 1.0});
    IntegralOptions opt;
    opt.Cp = 1.2;
    CHECK_THROWS_AS(solve_integral_equation(ComplexField(s, 1.0), ComplexField(s, 0.9), mask, 0.9, opt),
                    HypothesisError);
}

TEST_CASE("beltrami validation") {
    auto s = GridSpec::centered(1.0, 8);
    GeneralizedBeltramiEq eq{ComplexField(s, 0.6), ComplexField(s, 0.5), ComplexField(s, 0.0), ComplexField(s, 0.0),
                             0.9};
    CHECK_THROWS_AS(eq.validate(), HypothesisError);
}

TEST_CASE("holomorphic w factors with g = 1") {
    auto s = GridSpec::centered(1.1, 48);
    DomainMask mask(s, Ball{{0, 0}, 1.0});
    GeneralizedBeltramiEq eq{ComplexField(s, 0.0), ComplexField(s, 0.0), ComplexField(s, 0.0), ComplexField(s, 0.0),
                             0.1};
    auto w = ComplexField::from_function(s, [](Complex z) { return 2.0 + z; });
    auto fac = factorize(w, eq, mask);
    CHECK(fac.reconstruction < 1e-12);
    CHECK(fac.g_min == doctest::Approx(1.0));
    CHECK(fac.g_max == doctest::Approx(1.0));
}

TEST_CASE("reduced coefficients where w vanishes") {
    auto s = GridSpec::centered(1.0, 8);
    GeneralizedBeltramiEq eq{ComplexField(s, 0.1), ComplexField(s, 0.2), ComplexField(s, 1.0), ComplexField(s, 2.0),
                             0.5};
    auto r = reduce_coefficients(ComplexField(s, 0.0), eq);
    CHECK(std::abs(r.h(3, 3) - 3.0) < 1e-15);
    CHECK(std::abs(r.q0(3, 3) - Complex(0.3)) < 1e-15);
}
