#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "landis/field.hpp"
#include "landis/hash.hpp"

using namespace landis;

TEST_CASE("grid geometry and indexing") {
    auto s = GridSpec::centered(1.0, 8);
    CHECK(s.h == doctest::Approx(0.25));
    CHECK(s.size() == 81);
    CHECK(s.x(0) == doctest::Approx(-1.0));
    CHECK(s.index(2, 1) == 11);
    auto [i, j] = s.nearest({0.1, -0.3});
    CHECK(i == 4);
    CHECK(j == 3);
    CHECK(s.is_boundary(0, 5));
    CHECK_FALSE(s.is_boundary(1, 5));
}

TEST_CASE("wirtinger derivatives of polynomials") {
    auto s = GridSpec::centered(1.0, 32);
    auto f = ComplexField::from_function(s, [](Complex z) { return z * z + 2.0 * std::conj(z); });
    auto w = wirtinger(f);
    for (int j = 0; j <= s.ny; j += 5)
        for (int i = 0; i <= s.nx; i += 5) {
            Complex z = s.node(i, j).z();
            CHECK(std::abs(w.d(i, j) - 2.0 * z) < 1e-10);
            CHECK(std::abs(w.dbar(i, j) - 2.0) < 1e-10);
        }
}

TEST_CASE("cubic sampling is exact on bicubics") {
    auto s = GridSpec::centered(1.0, 16);
    auto p = [](double x, double y) { return x * x * x * y - 2 * y * y * y + x * y + 1; };
    auto f = ScalarField::from_function(s, p);
    CHECK(f.sample_cubic({0.13, -0.41}) == doctest::Approx(p(0.13, -0.41)).epsilon(1e-12));
    CHECK_THROWS_AS(f.sample({2.0, 0.0}), GeometryError);
}

TEST_CASE("sup norm over regions") {
    auto s = GridSpec::centered(2.0, 40);
    auto f = ScalarField::from_function(s, [](double x, double y) { return x * x + y * y; });
    // boundary samples are bilinear, which overshoots a convex function by O(h²)
    CHECK(sup_norm(f, Region(Ball{{0, 0}, 1.0})) == doctest::Approx(1.0).epsilon(1e-2));
    Polyline sq{{{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}};
    CHECK(sq.contains({0.1, 0.2}));
    CHECK_FALSE(sq.contains({0.6, 0.2}));
    CHECK(sq.winding_number({0, 0}) != 0);
}

TEST_CASE("binary round trip and grid mismatch") {
    auto s = GridSpec::centered(1.0, 8);
    auto f = ComplexField::from_function(s, [](Complex z) { return std::exp(z); });
    const std::string path = "unit_field_roundtrip.bin";
    write_binary(path, f);
    auto g = read_complex_binary(path);
    CHECK(g.spec() == s);
    CHECK((g - f).max_abs() == 0.0);
    std::remove(path.c_str());
    auto other = ScalarField(GridSpec::centered(1.0, 9), 1.0);
    CHECK_THROWS_AS(ScalarField(s, 1.0) + other, GridMismatch);
}

TEST_CASE("fnv1a known vectors") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
}
