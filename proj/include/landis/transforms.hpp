#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "landis/field.hpp"

namespace landis {

class ConvolutionEngine;

/// Bounded domain Ω sampled on the node-centred dual cells of a grid: each node
/// carries the fraction of its h×h cell lying inside Ω.
class DomainMask {
public:
    DomainMask() = default;
    /// Area fractions by 8×8 supersampling of each dual cell.
    DomainMask(const GridSpec& spec, const Region& region, int supersample = 8);
    DomainMask(const GridSpec& spec, std::vector<double> fractions);

    const GridSpec& spec() const { return spec_; }
    double fraction(std::size_t k) const { return frac_[k]; }
    const std::vector<double>& fractions() const { return frac_; }
    bool inside(std::size_t k) const { return frac_[k] > 0.0; }
    bool on_boundary(std::size_t k) const { return frac_[k] > 0.0 && frac_[k] < 1.0; }
    /// Fully inside and at least `cells` cells away from any partial or outside cell.
    bool interior(int i, int j, int cells) const;
    double area() const;
    std::size_t count() const;

    const ConvolutionEngine& engine() const;

private:
    GridSpec spec_;
    std::vector<double> frac_;
    std::shared_ptr<ConvolutionEngine> engine_;
};

/// Exact integrals over the axis-aligned rectangle [x1,x2]×[y1,y2] (not containing 0)
/// of 1/ζ and 1/ζ².
Complex cell_integral_inverse(double x1, double x2, double y1, double y2);
Complex cell_integral_inverse_square(double x1, double x2, double y1, double y2);

/// Tω(z) = −(1/π)∬_Ω ω(ζ)/(ζ − z) with exact cell integrals of the kernel, evaluated
/// at every node via FFT convolution.
ComplexField cauchy_T(const ComplexField& omega, const DomainMask& mask);
/// Principal-value Sω(z) = −(1/π)∬_Ω ω(ζ)/(ζ − z)²; the self cell contributes 0.
ComplexField beurling_S(const ComplexField& omega, const DomainMask& mask);

/// O(N²) direct summation with the same kernels; reference for small grids.
ComplexField cauchy_T_direct(const ComplexField& omega, const DomainMask& mask);
ComplexField beurling_S_direct(const ComplexField& omega, const DomainMask& mask);

/// Area-weighted discrete L^p norm over the mask.
double lp_norm(const ComplexField& f, const DomainMask& mask, double p);

struct NormProbe {
    double estimate = 0.0;          ///< running maximum of the trial ratios
    std::vector<double> ratios;     ///< per trial
    std::vector<double> running;    ///< running maximum after each trial
};

/// Randomized lower estimate of ‖S‖_{L^p → L^p}: trials g = ∂̄(bump · random wave)
/// supported inside the mask.
NormProbe operator_norm_probe(const DomainMask& mask, double p, int trials, std::uint64_t seed = 1);

/// Version string of the FFT library in use.
std::string fft_backend_version();

class ConvolutionEngine {
public:
    explicit ConvolutionEngine(const GridSpec& spec);
    ~ConvolutionEngine();

    /// out(m) = Σ_k rho(k) K(k − m) for the chosen kernel table.
    std::vector<Complex> correlate(const std::vector<Complex>& rho, bool square_kernel) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace landis
