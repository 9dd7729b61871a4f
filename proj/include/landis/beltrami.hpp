#pragma once

#include <cstdint>
#include <utility>

#include "landis/elliptic.hpp"

namespace landis {

/// η = (a11 − a22 + 2i a12)/det(A+I), ν = (det A − 1)/det(A+I).
std::pair<Complex, Complex> eta_nu(const Mat2& A);

struct BeltramiCoefficients {
    ComplexField eta, nu;
    double lambda = 1.0;

    /// max over nodes of |η| + |ν|
    double max_sum() const;
};

BeltramiCoefficients eta_nu_from_A(const CoefficientField& A);

enum class DForm {
    definition,  ///< ∂̄f + η∂f + ν·conj(∂f)
    expanded,    ///< real-coefficient expansion in u_x, u_y, v_x, v_y
    det_one      ///< first-order form valid when det A = 1
};

ComplexField apply_D(const CoefficientField& A, const ComplexField& f, DForm form = DForm::definition);

/// Coefficient α + iβ of ∂ in D̂ = ∂̄ + (α + iβ)∂.
struct HatOperator {
    ScalarField alpha, beta;
    double lambda = 1.0;

    ComplexField coefficient() const { return {alpha, beta}; }
    double max_modulus() const;
};

/// η_w = η + ν·conj(∂w)/∂w where |∂w| > 10⁻¹²·max|∂w|, η + ν elsewhere.
HatOperator eta_w_field(const CoefficientField& A, const ComplexField& w);

Mat2 hat_matrix(double alpha, double beta);

/// Â of the hat operator. Throws HypothesisError when α² + β² ≥ 1 somewhere.
CoefficientField hatA_from_hat(const HatOperator& H);

/// D̂f = (1+α+iβ)/2 f_x + (β + i(1−α))/2 f_y
ComplexField apply_D_hat(const HatOperator& H, const ComplexField& f);

struct HatSample {
    ComplexField f;
    double residual = 0.0;     ///< ‖D̂f‖∞ over nodes at least two cells from the edge
    double loop_defect = 0.0;  ///< max relative circulation over the audited loops
};

/// u solves L̂u = 0 with the given Dirichlet data; v is recovered from the
/// Cauchy–Riemann system v_y = â11 u_x + â12 u_y, v_x = −(â12 u_x + â22 u_y)
/// by averaging row-first and column-first trapezoid integration from `anchor`.
/// Throws SolverError when the loop audit exceeds `max_loop_defect`.
HatSample hat_holomorphic_sample(const HatOperator& H, const ScalarField& boundary, Point anchor = {0.0, 0.0},
                                 int audit_loops = 100, std::uint64_t audit_seed = 7, double max_loop_defect = 0.05);

/// v with v(ia, ja) = 0 from its gradient: average of row-first and column-first
/// trapezoid paths.
ScalarField integrate_gradient(const ScalarField& gx, const ScalarField& gy, int ia, int ja);

/// Relative circulation ∮(v_x dx + v_y dy)/∮|∇v||dz| of a gradient field along
/// random axis-aligned grid rectangles kept `margin` cells away from the edge.
double loop_defect(const ScalarField& gx, const ScalarField& gy, int loops, std::uint64_t seed, int margin = 0);

/// L = (D + W̃)D̃ for det A = 1.
struct Decomposition {
    ComplexField cx, cy;  ///< D̃ = cx ∂x + cy ∂y
    ComplexField Wtilde;
};

/// Throws HypothesisError when ‖det A − 1‖∞ > 10⁻¹⁰.
Decomposition decompose_L(const CoefficientField& A);

/// W̃ from the closed form given the derivatives of a11 and a12.
Complex wtilde_closed_form(const Mat2& A, double a11x, double a11y, double a12x, double a12y);

ComplexField apply_Dtilde(const Decomposition& dec, const ScalarField& u);

/// (D + W̃)D̃u, using the det-1 form of D.
ComplexField compose_decomposition(const CoefficientField& A, const Decomposition& dec, const ScalarField& u);

} // namespace landis
