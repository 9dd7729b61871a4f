#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "landis/field.hpp"

namespace landis {

struct Mat2 {
    double a11 = 1.0;
    double a12 = 0.0;
    double a22 = 1.0;

    double det() const { return a11 * a22 - a12 * a12; }
    double trace() const { return a11 + a22; }
    double min_eig() const;
    double max_eig() const;
};

/// Analytic coefficient family: A(z) can be evaluated anywhere, which is what the
/// oracles and the shift-and-scale maps need. `sample` freezes it onto a grid.
struct CoefficientFamily {
    std::string kind;
    double lambda = 1.0;
    double mu = 0.0;   ///< bound on |∇a_ij|
    std::function<Mat2(double, double)> eval;

    Mat2 operator()(double x, double y) const { return eval(x, y); }

    static CoefficientFamily identity();
    static CoefficientFamily constant(const Mat2& a, double lambda);
    /// A = R(θ) diag(e^{ℓ1}, e^{ℓ2}) R(θ)ᵀ with smooth random ℓ1, ℓ2, θ.
    /// |ℓ_k| ≤ 0.95 log(1/λ); the spatial frequency is scaled so that the
    /// analytic gradient bound is 0.97 μ. `det_one` forces ℓ2 = −ℓ1.
    static CoefficientFamily trig(double lambda, double mu, std::uint64_t seed, bool det_one = false);
};

class CoefficientField {
public:
    CoefficientField() = default;
    /// Validates ellipticity (eigenvalues in [λ, 1/λ]) and, when mu is finite,
    /// the discrete gradient bound. Throws HypothesisError.
    CoefficientField(ScalarField a11, ScalarField a12, ScalarField a22, double lambda,
                     double mu = std::numeric_limits<double>::infinity());

    static CoefficientField sample(const CoefficientFamily& fam, const GridSpec& spec);
    static CoefficientField identity(const GridSpec& spec);

    const GridSpec& spec() const { return a11_.spec(); }
    const ScalarField& a11() const { return a11_; }
    const ScalarField& a12() const { return a12_; }
    const ScalarField& a22() const { return a22_; }
    const ScalarField& detA() const { return det_; }
    double lambda() const { return lambda_; }
    double mu() const { return mu_; }
    Mat2 at(std::size_t k) const { return {a11_[k], a12_[k], a22_[k]}; }
    Mat2 at(int i, int j) const { return at(spec().index(i, j)); }

    /// Largest discrete |∇a_ij| over nodes (centred differences in the interior,
    /// first-order one-sided on the edge).
    double max_gradient() const;
    /// Realized ellipticity: min over nodes of min(λ_min, 1/λ_max).
    double realized_lambda() const;
    /// Throws HypothesisError when ‖∇a_ij‖∞ > bound (2% slack for the
    /// mixing of centred differences in x and y).
    void require_gradient_bound(double bound) const;

private:
    ScalarField a11_, a12_, a22_, det_;
    double lambda_ = 1.0;
    double mu_ = 0.0;
};

/// Smooth random scalar in [-1, 1]: normalized sum of plane waves with
/// |wave vector| ≤ freq.
struct SmoothRandom {
    struct Wave {
        double kx, ky, phase, amp;
    };
    std::vector<Wave> waves;
    double freq = 1.0;

    SmoothRandom(std::uint64_t seed, double freq, int terms = 6);
    double operator()(double x, double y) const;
    /// Analytic bound on |∇s|.
    double gradient_bound() const;
};

struct PotentialFamily {
    double M = 1.0;
    bool has_W = false;
    std::function<double(double, double)> V;
    std::function<std::array<double, 2>(double, double)> W;

    static PotentialFamily zero(double M = 1.0);
    static PotentialFamily constant(double M, double value);
    /// V = M (0.5 + 0.5 s(x, y)) ∈ [0, M]; optional W with |W| ≤ 0.97 √M.
    static PotentialFamily random(double M, std::uint64_t seed, bool with_W = false, double freq = 1.0);
};

class PotentialField {
public:
    PotentialField() = default;
    /// Validates V ≥ 0, ‖V‖∞ ≤ M and |W| ≤ √M. Throws HypothesisError.
    PotentialField(ScalarField V, double M, std::optional<ScalarField> W1 = {}, std::optional<ScalarField> W2 = {});

    static PotentialField sample(const PotentialFamily& fam, const GridSpec& spec);
    static PotentialField zero(const GridSpec& spec, double M = 1.0);

    const ScalarField& V() const { return V_; }
    bool has_W() const { return W1_.has_value(); }
    const ScalarField& W1() const { return *W1_; }
    const ScalarField& W2() const { return *W2_; }
    double M() const { return M_; }

private:
    ScalarField V_;
    std::optional<ScalarField> W1_, W2_;
    double M_ = 1.0;
};

enum class Variant { electric, div_magnetic, nondiv_magnetic };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

// ---------------------------------------------------------------------------
// Operators

/// Discrete div(A∇u). Interior nodes use a symmetric 9-point flux stencil: axis
/// and diagonal fluxes with harmonic-mean face coefficients, the mixed term split
/// along the two diagonals so that off-diagonal weights are nonnegative whenever
/// a11, a22 ≥ √(a12² + ε²), ε = (a11 + a22)/20 (discrete maximum principle). Edge
/// nodes fall back to the non-divergence expansion with one-sided differences.
ScalarField apply_L(const CoefficientField& A, const ScalarField& u);

/// a11 u_xx + 2 a12 u_xy + a22 u_yy + (∂x a11 + ∂y a12) u_x + (∂x a12 + ∂y a22) u_y.
ScalarField apply_L_nondivergence(const CoefficientField& A, const ScalarField& u);

/// The full variant operator as discretized by the solver:
///   electric         Lu − Vu
///   div_magnetic     Lu + ∇·(Wu) − Vu
///   nondiv_magnetic  Lu − W·∇u − Vu
ScalarField apply_operator(const CoefficientField& A, const PotentialField& P, Variant variant, const ScalarField& u);

struct SolveReport {
    double residual = 0.0;  ///< ‖b − Mu‖∞ / (‖M‖∞‖u‖∞ + ‖b‖∞), normwise backward error
    double condition_estimate = 0.0;
};

/// Factorizes the variant operator once; solves for many boundary data / sources.
class DirichletSolver {
public:
    DirichletSolver(const CoefficientField& A, const PotentialField& P, Variant variant);
    ~DirichletSolver();
    DirichletSolver(DirichletSolver&&) noexcept;
    DirichletSolver& operator=(DirichletSolver&&) noexcept;

    /// Boundary values are taken from `boundary` on the edge nodes; interior values
    /// of `boundary` are ignored. `source` (optional) is the right-hand side f of
    /// operator(u) = f.
    ScalarField solve(const ScalarField& boundary, const ScalarField* source = nullptr,
                      SolveReport* report = nullptr) const;

    double tolerance = 1e-12;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

ScalarField solve_dirichlet(const CoefficientField& A, const PotentialField& P, Variant variant,
                            const ScalarField& boundary, SolveReport* report = nullptr);

// ---------------------------------------------------------------------------
// Positive multiplier

/// c₁ making exp(c₁√M x) a subsolution: the positive root of
/// λc² − 1 − 2μc = 0 (electric) or λc² − 1 − 2μc − c = 0 (magnetic variants).
double subsolution_rate(double lambda, double mu, Variant variant);

struct MultiplierResult {
    ScalarField phi;
    double c1 = 0.0;        ///< boundary rate used
    double C1 = 0.0;        ///< realized max |log φ| / √M over the check region
    double min_phi = 0.0;
    double max_phi = 0.0;
    bool envelope_ok = true;  ///< exp(−C√M) ≤ φ ≤ exp(C√M) with C = c₁·(extent)
    SolveReport solve;
};

/// Positive solution of the equation the pipeline divides by: the variant
/// equation itself for the electric case, the non-divergence (adjoint) equation
/// for both magnetic variants. V ≡ 0 returns φ ≡ 1.
/// Throws HypothesisError when the computed φ is not positive.
MultiplierResult positive_multiplier(const CoefficientField& A, const PotentialField& P, Variant variant,
                                     std::optional<Region> check_region = {});

struct LogDerivativeReport {
    ScalarField psi;
    ScalarField psi_x, psi_y;
    double sup_grad = 0.0;  ///< over the region
    double residual = 0.0;  ///< ‖div(A∇ψ) + A∇ψ·∇ψ − V‖∞ on interior nodes of the region
};

/// ψ = log φ. `V` is the zero-order potential; magnetic variants pass W so the
/// residual includes the −W·∇ψ term of the adjoint equation.
LogDerivativeReport log_derivative_report(const CoefficientField& A, const ScalarField& phi, const PotentialField& P,
                                          Variant variant, const Region& region);

struct InteriorGradientReport {
    double grad_sup = 0.0;   ///< ‖∇φ‖∞ on the inner region
    double value_sup = 0.0;  ///< ‖φ‖∞ on the outer region
    double ratio = 0.0;
};

InteriorGradientReport interior_gradient_report(const ScalarField& phi, const Region& inner, const Region& outer);

struct NormalizedProblem {
    CoefficientField A;  ///< A/√det A, ellipticity λ²
    ScalarField W1, W2;  ///< A∇(1/√det A) + W/√det A
    ScalarField V;       ///< V/√det A
};

NormalizedProblem normalize_det(const CoefficientField& A, const PotentialField& P);

} // namespace landis
