#include <cmath>

#include "doctest.h"
#include "landis/transforms.hpp"

using namespace landis;

TEST_CASE("FFT convolution matches direct summation") {
    auto s = GridSpec::centered(1.1, 24);
    DomainMask mask(s, Ball{{0, 0}, 1.0});
    auto g = ComplexField::from_function(s, [](Complex z) { return 1.0 + z * std::conj(z) + Complex(0, 1) * z; });
    CHECK((cauchy_T(g, mask) - cauchy_T_direct(g, mask)).max_abs() < 1e-11);
    CHECK((beurling_S(g, mask) - beurling_S_direct(g, mask)).max_abs() < 1e-11);
}

TEST_CASE("cell integrals against quadrature") {
    Complex ref = 0.0;
    const int n = 400;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            Complex z(1.0 + (a + 0.5) / n, 0.5 + (b + 0.5) / n);
            ref += 1.0 / z / double(n * n);
        }
    CHECK(std::abs(cell_integral_inverse(1.0, 2.0, 0.5, 1.5) - ref) < 1e-5);
}

TEST_CASE("mask area approximates the disk") {
    auto s = GridSpec::centered(1.2, 64);
    DomainMask mask(s, Ball{{0, 0}, 1.0});
    CHECK(mask.area() == doctest::Approx(M_PI).epsilon(1e-3));
}

TEST_CASE("norm probe stays near one for p close to 2") {
    auto s = GridSpec::centered(1.1, 64);
    DomainMask mask(s, Ball{{0, 0}, 1.0});
    auto probe = operator_norm_probe(mask, 2.1, 4);
    CHECK(probe.estimate >= 0.9);
    CHECK(probe.estimate <= 1.5);
    CHECK(probe.running.size() == 4);
}
