#include "landis/transforms.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

namespace landis {

std::string fft_backend_version() { return fftw_version; }

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// ∬ x/(x²+y²) and ∬ y/(x²+y²): mixed antiderivatives, continuous away from 0
double Fx(double x, double y) {
    double r2 = x * x + y * y;
    double at = x == 0.0 ? 0.0 : x * std::atan(y / x);
    return 0.5 * y * std::log(r2) + at - y;
}

double Fy(double x, double y) {
    double r2 = x * x + y * y;
    double at = y == 0.0 ? 0.0 : y * std::atan(x / y);
    return 0.5 * x * std::log(r2) + at - x;
}

template <class F>
double corners(F f, double x1, double x2, double y1, double y2) {
    return f(x2, y2) - f(x1, y2) - f(x2, y1) + f(x1, y1);
}

// ∫_{y1}^{y2} dy / (a + i y), a ≠ 0
Complex line_inverse(double a, double y1, double y2) {
    auto phi = [a](double eta) { return Complex(std::atan(eta / a), -0.5 * std::log(a * a + eta * eta)); };
    return phi(y2) - phi(y1);
}

} // namespace

Complex cell_integral_inverse(double x1, double x2, double y1, double y2) {
    return {corners(Fx, x1, x2, y1, y2), -corners(Fy, x1, x2, y1, y2)};
}

Complex cell_integral_inverse_square(double x1, double x2, double y1, double y2) {
    // ∂x(−1/ζ) = 1/ζ²
    return line_inverse(x1, y1, y2) - line_inverse(x2, y1, y2);
}

// ---------------------------------------------------------------------------
// Mask

DomainMask::DomainMask(const GridSpec& spec, const Region& region, int supersample) : spec_(spec) {
    frac_.assign(spec.size(), 0.0);
    const int n = std::max(1, supersample);
    const double sub = spec.h / n;
    for (int j = 0; j <= spec.ny; ++j)
        for (int i = 0; i <= spec.nx; ++i) {
            Point c = spec.node(i, j);
            int hits = 0;
            for (int b = 0; b < n; ++b)
                for (int a = 0; a < n; ++a)
                    hits += region_contains(region, {c.x - 0.5 * spec.h + (a + 0.5) * sub, c.y - 0.5 * spec.h + (b + 0.5) * sub});
            frac_[spec.index(i, j)] = static_cast<double>(hits) / (n * n);
        }
    if (count() == 0)
        throw GeometryError("domain_mask", "mask is empty");
    engine_ = std::make_shared<ConvolutionEngine>(spec_);
}

DomainMask::DomainMask(const GridSpec& spec, std::vector<double> fractions) : spec_(spec), frac_(std::move(fractions)) {
    if (frac_.size() != spec.size())
        throw GridMismatch("domain_mask", "fraction count does not match grid");
    if (count() == 0)
        throw GeometryError("domain_mask", "mask is empty");
    engine_ = std::make_shared<ConvolutionEngine>(spec_);
}

bool DomainMask::interior(int i, int j, int cells) const {
    for (int b = -cells; b <= cells; ++b)
        for (int a = -cells; a <= cells; ++a) {
            int ii = i + a, jj = j + b;
            if (ii < 0 || jj < 0 || ii > spec_.nx || jj > spec_.ny)
                return false;
            if (frac_[spec_.index(ii, jj)] < 1.0)
                return false;
        }
    return true;
}

double DomainMask::area() const {
    double a = 0.0;
    for (double f : frac_)
        a += f;
    return a * spec_.h * spec_.h;
}

std::size_t DomainMask::count() const {
    return static_cast<std::size_t>(std::count_if(frac_.begin(), frac_.end(), [](double f) { return f > 0.0; }));
}

const ConvolutionEngine& DomainMask::engine() const {
    if (!engine_)
        throw GeometryError("domain_mask", "mask is not initialized");
    return *engine_;
}

// ---------------------------------------------------------------------------
// FFT engine

struct ConvolutionEngine::Impl {
    int px = 0, py = 0, nx = 0, ny = 0;
    fftw_complex* kT = nullptr;
    fftw_complex* kS = nullptr;
    fftw_plan fwd = nullptr, bwd = nullptr;

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (fwd)
            fftw_destroy_plan(fwd);
        if (bwd)
            fftw_destroy_plan(bwd);
        fftw_free(kT);
        fftw_free(kS);
    }
};

ConvolutionEngine::ConvolutionEngine(const GridSpec& spec) : impl_(std::make_unique<Impl>()) {
    auto& m = *impl_;
    m.nx = spec.nodes_x();
    m.ny = spec.nodes_y();
    m.px = 2 * m.nx;
    m.py = 2 * m.ny;
    const std::size_t P = static_cast<std::size_t>(m.px) * m.py;
    m.kT = fftw_alloc_complex(P);
    m.kS = fftw_alloc_complex(P);
    {
        std::lock_guard lock(planner_mutex());
        fftw_complex* tmp = fftw_alloc_complex(P);
        m.fwd = fftw_plan_dft_2d(m.py, m.px, tmp, tmp, FFTW_FORWARD, FFTW_ESTIMATE);
        m.bwd = fftw_plan_dft_2d(m.py, m.px, tmp, tmp, FFTW_BACKWARD, FFTW_ESTIMATE);
        fftw_free(tmp);
    }
    std::fill_n(reinterpret_cast<double*>(m.kT), 2 * P, 0.0);
    std::fill_n(reinterpret_cast<double*>(m.kS), 2 * P, 0.0);
    const double h = spec.h;
    // convolution kernel K̃(d) = K(−d) stored at d mod P
    for (int dy = -(m.ny - 1); dy <= m.ny - 1; ++dy)
        for (int dx = -(m.nx - 1); dx <= m.nx - 1; ++dx) {
            if (dx == 0 && dy == 0)
                continue;
            double x1 = -dx - 0.5, x2 = -dx + 0.5, y1 = -dy - 0.5, y2 = -dy + 0.5;
            Complex t = -h / std::numbers::pi * cell_integral_inverse(x1, x2, y1, y2);
            Complex s = -1.0 / std::numbers::pi * cell_integral_inverse_square(x1, x2, y1, y2);
            std::size_t idx = static_cast<std::size_t>((dy + m.py) % m.py) * m.px + (dx + m.px) % m.px;
            m.kT[idx][0] = t.real();
            m.kT[idx][1] = t.imag();
            m.kS[idx][0] = s.real();
            m.kS[idx][1] = s.imag();
        }
    fftw_execute_dft(m.fwd, m.kT, m.kT);
    fftw_execute_dft(m.fwd, m.kS, m.kS);
}

ConvolutionEngine::~ConvolutionEngine() = default;

std::vector<Complex> ConvolutionEngine::correlate(const std::vector<Complex>& rho, bool square_kernel) const {
    const auto& m = *impl_;
    const std::size_t P = static_cast<std::size_t>(m.px) * m.py;
    fftw_complex* buf = fftw_alloc_complex(P);
    std::fill_n(reinterpret_cast<double*>(buf), 2 * P, 0.0);
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) {
            const Complex& v = rho[static_cast<std::size_t>(j) * m.nx + i];
            auto idx = static_cast<std::size_t>(j) * m.px + i;
            buf[idx][0] = v.real();
            buf[idx][1] = v.imag();
        }
    fftw_execute_dft(m.fwd, buf, buf);
    const fftw_complex* k = square_kernel ? m.kS : m.kT;
    for (std::size_t q = 0; q < P; ++q) {
        Complex a(buf[q][0], buf[q][1]), b(k[q][0], k[q][1]);
        Complex c = a * b;
        buf[q][0] = c.real();
        buf[q][1] = c.imag();
    }
    fftw_execute_dft(m.bwd, buf, buf);
    std::vector<Complex> out(static_cast<std::size_t>(m.nx) * m.ny);
    const double scale = 1.0 / static_cast<double>(P);
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) {
            auto idx = static_cast<std::size_t>(j) * m.px + i;
            out[static_cast<std::size_t>(j) * m.nx + i] = Complex(buf[idx][0], buf[idx][1]) * scale;
        }
    fftw_free(buf);
    return out;
}

// ---------------------------------------------------------------------------
// Transforms

namespace {

std::vector<Complex> weighted(const ComplexField& omega, const DomainMask& mask) {
    require_same_grid(omega.spec(), mask.spec(), "transforms");
    std::vector<Complex> rho(omega.size());
    for (std::size_t k = 0; k < rho.size(); ++k)
        rho[k] = omega[k] * mask.fraction(k);
    return rho;
}

ComplexField direct(const ComplexField& omega, const DomainMask& mask, bool square) {
    auto rho = weighted(omega, mask);
    const auto& s = mask.spec();
    std::vector<Complex> out(s.size());
    for (int mj = 0; mj <= s.ny; ++mj)
        for (int mi = 0; mi <= s.nx; ++mi) {
            Complex acc = 0.0;
            for (int kj = 0; kj <= s.ny; ++kj)
                for (int ki = 0; ki <= s.nx; ++ki) {
                    auto k = s.index(ki, kj);
                    if (rho[k] == 0.0 || (ki == mi && kj == mj))
                        continue;
                    double dx = ki - mi, dy = kj - mj;
                    Complex ker = square ? cell_integral_inverse_square(dx - 0.5, dx + 0.5, dy - 0.5, dy + 0.5)
                                         : s.h * cell_integral_inverse(dx - 0.5, dx + 0.5, dy - 0.5, dy + 0.5);
                    acc += rho[k] * ker;
                }
            out[s.index(mi, mj)] = -acc / std::numbers::pi;
        }
    return {s, std::move(out)};
}

} // namespace

ComplexField cauchy_T(const ComplexField& omega, const DomainMask& mask) {
    return {mask.spec(), mask.engine().correlate(weighted(omega, mask), false)};
}

ComplexField beurling_S(const ComplexField& omega, const DomainMask& mask) {
    return {mask.spec(), mask.engine().correlate(weighted(omega, mask), true)};
}

ComplexField cauchy_T_direct(const ComplexField& omega, const DomainMask& mask) { return direct(omega, mask, false); }
ComplexField beurling_S_direct(const ComplexField& omega, const DomainMask& mask) { return direct(omega, mask, true); }

double lp_norm(const ComplexField& f, const DomainMask& mask, double p) {
    require_same_grid(f.spec(), mask.spec(), "lp_norm");
    double acc = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
        if (mask.inside(k))
            acc += std::pow(std::abs(f[k]), p) * mask.fraction(k);
    return std::pow(acc * mask.spec().h * mask.spec().h, 1.0 / p);
}

NormProbe operator_norm_probe(const DomainMask& mask, double p, int trials, std::uint64_t seed) {
    if (!(p > 2.0 && p <= 4.0))
        throw ConfigError("operator_norm_probe", "p must lie in (2, 4]");
    const auto& s = mask.spec();
    // centroid and inradius of the fully-inside part
    double cx = 0, cy = 0, wsum = 0;
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i) {
            double f = mask.fraction(s.index(i, j));
            cx += f * s.x(i);
            cy += f * s.y(j);
            wsum += f;
        }
    cx /= wsum;
    cy /= wsum;
    double inr = 1e300;
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i)
            if (mask.fraction(s.index(i, j)) < 1.0)
                inr = std::min(inr, std::hypot(s.x(i) - cx, s.y(j) - cy));
    if (!(inr > 4 * s.h))
        throw GeometryError("operator_norm_probe", "mask too thin for the probe");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    NormProbe out;
    for (int t = 0; t < trials; ++t) {
        double rad = inr * (0.4 + 0.45 * U(rng));
        double ox = cx + (inr - rad) * 0.8 * (2 * U(rng) - 1) / std::sqrt(2.0);
        double oy = cy + (inr - rad) * 0.8 * (2 * U(rng) - 1) / std::sqrt(2.0);
        int waves = 1 + static_cast<int>(3 * U(rng));
        std::vector<std::array<double, 4>> wv;
        for (int w = 0; w < waves; ++w) {
            double k = (8.0 / rad) * U(rng), th = 2 * std::numbers::pi * U(rng);
            wv.push_back({k * std::cos(th), k * std::sin(th), 2 * std::numbers::pi * U(rng), 2 * U(rng) - 1});
        }
        auto psi = ComplexField::from_function(s, [&](Complex z) {
            double r = std::hypot(z.real() - ox, z.imag() - oy) / rad;
            if (r >= 1.0)
                return Complex(0.0);
            double b = std::exp(-1.0 / (1.0 - r * r));
            Complex acc = 0.0;
            for (const auto& w : wv)
                acc += w[3] * std::exp(Complex(0.0, w[0] * z.real() + w[1] * z.imag() + w[2]));
            return b * acc;
        });
        auto g = wirtinger(psi).dbar;
        double gn = lp_norm(g, mask, p);
        if (gn == 0.0)
            continue;
        double ratio = lp_norm(beurling_S(g, mask), mask, p) / gn;
        out.ratios.push_back(ratio);
        out.estimate = std::max(out.estimate, ratio);
        out.running.push_back(out.estimate);
    }
    return out;
}

} // namespace landis
