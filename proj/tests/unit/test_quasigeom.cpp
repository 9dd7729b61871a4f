#include <cmath>

#include "doctest.h"
#include "landis/quasigeom.hpp"

using namespace landis;

TEST_CASE("laplacian fundamental solution is ln|z|") {
    auto s = GridSpec::centered(2.0, 64);
    auto F = fundamental_solution(CoefficientField::identity(s), {0, 0}, 1.8);
    CHECK(F.value({0.6, 0.8}) == doctest::Approx(0.0).epsilon(1e-12));
    auto c = level_set(F, 1.0);
    CHECK(inradius(c, {0, 0}) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(circumradius(c, {0, 0}) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("constant closed form has ellipse level sets") {
    Mat2 a{1.6, 0.5, 0.9};
    double g1 = constant_fundamental_solution(a, {0.3, 0.4});
    double g2 = constant_fundamental_solution(a, {0.6, 0.8});
    CHECK(g2 - g1 == doctest::Approx(std::log(2.0) / std::sqrt(a.det())).epsilon(1e-12));
}

TEST_CASE("atlas nesting and membership") {
    auto s = GridSpec::centered(2.5, 96);
    auto A = CoefficientField::sample(CoefficientFamily::trig(0.5, 1.0, 1), s);
    QuasiBallAtlas atlas(fundamental_solution(A, {0, 0}, 2.3), {0.5, 1.0, 1.4});
    CHECK(atlas.nested());
    CHECK(atlas.sigma_hat(1.0) <= atlas.rho_hat(1.0));
    CHECK(quasi_ball_membership(atlas, {0, 0}, 0.5));
    CHECK_FALSE(quasi_ball_membership(atlas, {atlas.rho_hat(1.4) + 0.05, 0}, 1.4));
    CHECK_THROWS(atlas.circle(0.7));
}

TEST_CASE("atlas cache hits on repeated keys") {
    AtlasCache cache;
    auto s = GridSpec::centered(2.0, 32);
    int builds = 0;
    auto build = [&] {
        ++builds;
        return fundamental_solution(CoefficientField::identity(s), {0, 0}, 1.8);
    };
    bool hit = true;
    cache.get_or_build("k", {1.0}, build, &hit);
    CHECK_FALSE(hit);
    cache.get_or_build("k", {1.0}, build, &hit);
    CHECK(hit);
    CHECK(builds == 1);
    CHECK(cache.size() == 1);
}
