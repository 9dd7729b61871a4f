#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "landis/beltrami.hpp"
#include "landis/quasigeom.hpp"
#include "landis/similarity.hpp"

namespace landis {

struct StreamFunction {
    ScalarField vtilde;
    double divergence_residual = 0.0;  ///< ‖div F‖∞ / ‖|∂x F1| + |∂y F2|‖∞, F the flux
    double component_residual = 0.0;   ///< relative mismatch of ∇ṽ against the rotated flux
    double path_defect = 0.0;          ///< loop audit of the rotated flux
};

/// ṽ with ṽ_y = F1, ṽ_x = −F2 where F = φ²(A∇v + W v) (W omitted in the electric
/// form), ṽ = 0 at the node nearest the origin. Refuses (HypothesisError) when the
/// flux divergence residual over the check region exceeds `tol`.
StreamFunction stream_function(const ScalarField& phi, const ScalarField& v, const CoefficientField& A,
                               const ScalarField* W1 = nullptr, const ScalarField* W2 = nullptr, double tol = 0.25,
                               std::optional<Region> check_region = {});

struct WAlpha {
    ComplexField w;
    ComplexField coef;      ///< α = D(log φ), or β for the magnetic form
    double residual = 0.0;  ///< ‖Dw − coef(w + w̄)‖∞ / max|∇w| on check-region nodes two cells inside
    double sup_coef = 0.0;  ///< over the check region (whole grid when none)
};

/// w = φ²v + iṽ and the coefficient of Dw = coef·(w + w̄).
WAlpha build_w_and_alpha(const ScalarField& phi, const ScalarField& v, const ScalarField& vtilde,
                         const CoefficientField& A, const ScalarField* W1 = nullptr, const ScalarField* W2 = nullptr,
                         std::optional<Region> check_region = {});

struct UpsilonResult {
    ComplexField upsilon;        ///< e + i f
    ComplexField upsilon_tilde;  ///< ½(Υ + Ῡ·conj(D̃v)/D̃v), 0 where D̃v vanishes
    double sup_tilde = 0.0;      ///< over the check region
    double identity_residual = 0.0;  ///< ‖(W − 2A∇ψ)·∇v − Υ̃D̃v‖∞ / ‖(W − 2A∇ψ)·∇v‖∞
};

/// Requires det A = 1 (HypothesisError otherwise).
UpsilonResult upsilon_field(const CoefficientField& A, const ScalarField& W1, const ScalarField& W2,
                            const ScalarField& psi_x, const ScalarField& psi_y, const ScalarField& v,
                            std::optional<Region> check_region = {});

struct ThreeCircle {
    double s1 = 0, s2 = 0, s3 = 0;
    double M1 = 0, M2 = 0, M3 = 0;  ///< max |f| on Z_s
    double lhs = 0, rhs = 0;
    double theta = 0;        ///< log(s3/s2)/log(s3/s1)
    double rel_defect = 0;   ///< (lhs − rhs) over max(|lhs|, |rhs|, log(s3/s1)|log M3 − log M1|)
};

/// Throws ConfigError unless 0 < s1 < s2 < s3 are circles of the atlas.
ThreeCircle three_quasi_circle(const ComplexField& f, const QuasiBallAtlas& atlas, double s1, double s2, double s3);

struct LandisProblem {
    CoefficientField A;
    PotentialField P;
    Variant variant = Variant::electric;
    ScalarField u;
    std::shared_ptr<const QuasiBallAtlas> atlas;
    double b = 0.0, d = 0.0;
    double C0 = 1.0;  ///< ‖u‖_{L∞(B_d)} ≤ exp(C0√M)

    struct Check {
        double residual = 0.0;  ///< ‖operator(u)‖∞ / (‖operator‖ scale ‖u‖∞) on interior nodes
        double sup_b = 0.0, sup_d = 0.0;
        bool upper_ok = false, lower_ok = false;
    };
    Check check() const;
    /// Throws HypothesisError naming the failed normalization.
    void validate(double residual_tol = 1e-8) const;
};

struct ExtremalOptions {
    int modes = 24;        ///< boundary data 1, cos kθ, sin kθ for k ≤ modes
    double r0 = 0.25;      ///< ball whose mass is penalized
    double target = 0.99;  ///< fraction of exp(C0√M) aimed at for sup_{B_d}/sup_{B_b}
    int bisection = 40;
};

/// Manufactured solution that vanishes as fast as the normalization allows:
/// among Dirichlet solutions with trigonometric boundary data, maximize the mass
/// on B_b against the mass on B_{r0} with a B_d penalty tuned so that
/// sup_{B_d}|u| ≈ target·exp(C0√M) when sup_{B_b}|u| = 1.
ScalarField extremal_solution(const CoefficientField& A, const PotentialField& P, Variant variant, double b, double d,
                              double C0, const ExtremalOptions& opt = {});

struct VanishingOptions {
    std::vector<double> fit_radii = {0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6};
    std::vector<double> report_radii = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0};
    double s1 = 0.5, s2 = 1.0, s3 = 1.2;  ///< quasi-circles of the hat operator
    IntegralOptions integral;
    double stream_tol = 0.25;
};

struct VanishingOrderReport {
    std::vector<double> radii;
    std::vector<double> sup_ball;           ///< sup_{B_r}|u|
    std::map<double, double> sup_quasi;     ///< sup_{Q_s}|u| over the problem atlas
    double kappa_hat = 0.0;                 ///< log-log slope over fit_radii
    double sqrtM = 0.0;
    double kappa_over_sqrtM = 0.0;
    ThreeCircle three_circle;
    double theta = 0.0;
    std::map<std::string, double> stages;   ///< per-stage diagnostics, keyed by name
    std::string route;                      ///< "stream" or "gradient"
};

/// Runs multiplier → v → (ṽ, w, α | Υ̃, D̃v) → similarity factorization → three
/// quasi-circles on the hat operator, and measures sup_{B_r}|u|. Stage failures
/// propagate with the stage name.
VanishingOrderReport vanishing_order_experiment(const LandisProblem& problem, const VanishingOptions& opt = {});

/// Least-squares slope of log values against log abscissae.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

enum class MagneticScaling { aR, R };

struct ShiftScaled {
    CoefficientField A;
    PotentialField P;
    ScalarField u;
    double M = 0.0;       ///< (aR)² · M of the source problem
    double scale = 0.0;   ///< aR
    Point z1;             ///< −z0/(aR)
    double u_at_z1 = 0.0;
    double u_at_origin = 0.0;
};

/// u_R(z) = u(z0 + aRz) on the node-aligned subgrid covering B_{d·aR}(z0);
/// V_R = (aR)²V, A_R = A, W_R = factor·W with factor aR or R. Values are copied,
/// so every identity holds exactly. Throws GeometryError when the window does not
/// cover the ball or z0 is not a node, ConfigError when 1/a > b.
ShiftScaled shift_scale(const ScalarField& u, const CoefficientField& A, const PotentialField& P, Point z0, double R,
                        double a, double b, double d, MagneticScaling ws = MagneticScaling::aR);

struct ScanRow {
    double R = 0.0;
    double inf_sup = 0.0;  ///< inf over sampled |z0| = R of sup_{B_1(z0)}|u|
    double C_hat = 0.0;    ///< −log(inf_sup)/(R log R)
};

struct LandisScan {
    std::vector<ScanRow> rows;
    double C_envelope = 0.0;  ///< max C_hat over rows
};

/// Throws GeometryError when some B_1(z0) leaves the window.
LandisScan landis_scan(const ScalarField& u, const std::vector<double>& R_list, int angles = 64);

} // namespace landis
