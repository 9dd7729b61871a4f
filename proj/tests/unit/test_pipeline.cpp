#include <cmath>

#include "doctest.h"
#include "landis/pipeline.hpp"

using namespace landis;

TEST_CASE("loglog slope of a power law") {
    CHECK(loglog_slope({1, 2, 4, 8}, {3, 3 * std::sqrt(2.0), 6, 6 * std::sqrt(2.0)}) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("three quasi-circles on z^2 for the Laplacian are tight") {
    auto s = GridSpec::centered(2.0, 128);
    QuasiBallAtlas atlas(fundamental_solution(CoefficientField::identity(s), {0, 0}, 1.8), {0.5, 1.0, 1.2});
    auto f = ComplexField::from_function(s, [](Complex z) { return z * z; });
    auto t = three_quasi_circle(f, atlas, 0.5, 1.0, 1.2);
    CHECK(std::abs(t.rel_defect) < 1e-6);
    CHECK(t.theta == doctest::Approx(std::log(1.2) / std::log(2.4)));
    CHECK_THROWS_AS(three_quasi_circle(f, atlas, 1.0, 0.5, 1.2), ConfigError);
}

TEST_CASE("stream function of a constant coefficient solution") {
    auto s = GridSpec::centered(1.0, 64);
    auto A = CoefficientField::identity(s);
    auto v = ScalarField::from_function(s, [](double x, double y) { return x * x - y * y; });
    auto st = stream_function(ScalarField(s, 1.0), v, A);
    // conjugate of x² − y² is 2xy
    CHECK(st.vtilde.sample({0.5, 0.5}) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("shift and scale refuses a point off the window") {
    auto s = GridSpec::centered(2.0, 32);
    auto A = CoefficientField::identity(s);
    auto P = PotentialField::zero(s);
    auto u = ScalarField(s, 1.0);
    CHECK_THROWS_AS(shift_scale(u, A, P, {1.5, 0}, 1.0, 1.5, 0.8, 2.0), GeometryError);
    CHECK_THROWS_AS(shift_scale(u, A, P, {0, 0}, 0.25, 1.0, 0.8, 2.0), ConfigError);
}

TEST_CASE("landis scan of a constant solution") {
    auto s = GridSpec::centered(8.0, 64);
    auto scan = landis_scan(ScalarField(s, 1.0), {2, 4, 6});
    CHECK(scan.rows.size() == 3);
    CHECK(scan.C_envelope == doctest::Approx(0.0));
}

TEST_CASE("w carries phi^2 v and the zero magnetic field changes nothing") {
    auto s = GridSpec::centered(1.5, 64);
    auto A = CoefficientField::sample(CoefficientFamily::trig(0.5, 1.0, 6), s);
    auto P = PotentialField::sample(PotentialFamily::random(4.0, 2), s);
    auto u = solve_dirichlet(A, P, Variant::electric,
                             ScalarField::from_function(s, [](double x, double y) { return 2 + x - 0.5 * y; }));
    auto phi = positive_multiplier(A, P, Variant::electric).phi;
    std::vector<double> vv(s.size());
    for (std::size_t k = 0; k < s.size(); ++k)
        vv[k] = u[k] / phi[k];
    ScalarField v(s, vv);
    auto st = stream_function(phi, v, A, nullptr, nullptr, 0.25, Region(Ball{{0, 0}, 1.2}));
    auto e = build_w_and_alpha(phi, v, st.vtilde, A);
    ScalarField zero(s, 0.0);
    auto m = build_w_and_alpha(phi, v, st.vtilde, A, &zero, &zero);
    double worst = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        worst = std::max(worst, std::abs(e.w[k].real() / (phi[k] * phi[k]) - v[k]) / (1 + std::abs(v[k])));
        CHECK(e.w[k] == m.w[k]);
        CHECK(e.coef[k] == m.coef[k]);
    }
    CHECK(worst < 1e-14);
}

TEST_CASE("sup over nested balls is nondecreasing") {
    auto s = GridSpec::centered(1.0, 64);
    auto u = ScalarField::from_function(s, [](double x, double y) { return std::sin(5 * x) * std::cos(3 * y); });
    double prev = 0.0;
    for (double r : {0.05, 0.1, 0.2, 0.4, 0.8}) {
        double v = sup_norm(u, Region(Ball{{0, 0}, r}));
        CHECK(v >= prev);
        prev = v;
    }
}
