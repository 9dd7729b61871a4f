#include <cmath>

#include "doctest.h"
#include "landis/elliptic.hpp"

using namespace landis;

TEST_CASE("ellipticity and potential hypotheses are enforced") {
    auto s = GridSpec::centered(1.0, 8);
    CHECK_THROWS_AS(CoefficientField(ScalarField(s, 3.0), ScalarField(s, 0.0), ScalarField(s, 1.0), 0.5),
                    HypothesisError);
    CHECK_THROWS_AS(PotentialField(ScalarField(s, -0.1), 1.0), HypothesisError);
    CHECK_THROWS_AS(PotentialField(ScalarField(s, 2.0), 1.0), HypothesisError);
    CHECK(parse_variant(to_string(Variant::nondiv_magnetic)) == Variant::nondiv_magnetic);
}

TEST_CASE("trig family respects its bounds") {
    auto fam = CoefficientFamily::trig(0.4, 1.0, 5);
    auto A = CoefficientField::sample(fam, GridSpec::centered(2.0, 64));
    CHECK(A.realized_lambda() >= 0.4);
    CHECK(A.max_gradient() <= 1.02);
    auto one = CoefficientFamily::trig(0.4, 1.0, 5, true);
    CHECK(one(0.3, -0.2).det() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("identity operator is the five-point Laplacian on quadratics") {
    auto s = GridSpec::centered(1.0, 16);
    auto u = ScalarField::from_function(s, [](double x, double y) { return x * x + 3 * y * y - x * y; });
    auto L = apply_L(CoefficientField::identity(s), u);
    for (int j = 1; j < s.ny; ++j)
        for (int i = 1; i < s.nx; ++i)
            CHECK(L(i, j) == doctest::Approx(8.0).epsilon(1e-9));
}

TEST_CASE("Dirichlet solve reproduces a discrete solution") {
    auto s = GridSpec::centered(1.0, 32);
    auto A = CoefficientField::sample(CoefficientFamily::trig(0.5, 1.0, 2), s);
    auto P = PotentialField::sample(PotentialFamily::random(4.0, 3), s);
    SolveReport rep;
    auto u = solve_dirichlet(A, P, Variant::electric,
                             ScalarField::from_function(s, [](double x, double y) { return 1 + x * y; }), &rep);
    CHECK(rep.residual < 1e-12);
    auto r = apply_operator(A, P, Variant::electric, u);
    double worst = 0.0;
    for (int j = 1; j < s.ny; ++j)
        for (int i = 1; i < s.nx; ++i)
            worst = std::max(worst, std::abs(r(i, j)));
    CHECK(worst < 1e-8);
}

TEST_CASE("positive multiplier stays positive for large M") {
    auto s = GridSpec::centered(2.0, 64);
    auto A = CoefficientField::sample(CoefficientFamily::trig(0.5, 1.0, 3), s);
    auto P = PotentialField::sample(PotentialFamily::random(64.0, 5), s);
    auto m = positive_multiplier(A, P, Variant::electric);
    CHECK(m.min_phi > 0.0);
    CHECK(m.c1 == doctest::Approx(subsolution_rate(A.lambda(), A.mu(), Variant::electric)));
    auto one = positive_multiplier(A, PotentialField::zero(s), Variant::electric);
    CHECK(one.phi.min() == 1.0);
    CHECK(one.phi.max() == 1.0);
}

TEST_CASE("subsolution rate is the positive root") {
    for (auto v : {Variant::electric, Variant::div_magnetic}) {
        double c = subsolution_rate(0.5, 1.0, v);
        double extra = v == Variant::electric ? 0.0 : c;
        CHECK(0.5 * c * c - 1 - 2 * c - extra == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("determinant normalization") {
    auto s = GridSpec::centered(1.0, 16);
    auto A = CoefficientField::sample(CoefficientFamily::trig(0.5, 1.0, 8), s);
    auto N = normalize_det(A, PotentialField::zero(s));
    for (std::size_t k = 0; k < s.size(); k += 7)
        CHECK(N.A.at(k).det() == doctest::Approx(1.0).epsilon(1e-12));
}
