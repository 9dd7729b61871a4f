#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "landis/transforms.hpp"

namespace landis {

/// ∂̄w + q1 ∂w + q2 conj(∂w) = A w + B w̄
struct GeneralizedBeltramiEq {
    ComplexField q1, q2, Acoef, Bcoef;
    double alpha0 = 0.0;

    /// Throws HypothesisError unless |q1| + |q2| ≤ alpha0 < 1 at every node.
    void validate() const;
};

struct ReducedCoefficients {
    ComplexField h;   ///< A + B w̄/w (A + B where w = 0)
    ComplexField q0;  ///< q1 + q2 conj(∂w)/∂w (q1 + q2 where ∂w = 0)
};

ReducedCoefficients reduce_coefficients(const ComplexField& w, const GeneralizedBeltramiEq& eq);

struct IntegralOptions {
    double p = 2.1;
    int probe_trials = 8;
    std::uint64_t probe_seed = 1;
    std::optional<double> Cp;  ///< skip the probe and use this operator-norm estimate
    double tol = 1e-10;        ///< on ‖ω_{k+1} − ω_k‖∞, relative to max(1, ‖h‖∞)
    int kmax = 200;
};

struct IntegralSolve {
    ComplexField omega;
    int iterations = 0;
    double Cp = 0.0;                  ///< operator-norm estimate used for the precondition
    double contraction_bound = 0.0;   ///< Cp · alpha0
    double observed_ratio = 0.0;      ///< max L^p increment ratio after the first step
    std::vector<double> increments;   ///< ‖ω_{k+1} − ω_k‖∞
};

/// Fixed point of ω + q0·Sω = h on the mask. Refuses (HypothesisError) when
/// Cp·alpha0 ≥ 1; SolverError when kmax iterations do not converge.
IntegralSolve solve_integral_equation(const ComplexField& h, const ComplexField& q0, const DomainMask& mask,
                                      double alpha0, const IntegralOptions& opt = {});

struct SimilarityFactorization {
    ComplexField f, g, omega, phi, h, q0;
    double residual_f = 0.0;       ///< ‖∂̄f + q0 ∂f‖∞ on interior mask nodes
    double residual_f_rms = 0.0;   ///< ‖∂̄f + q0 ∂f‖₂ / ‖(f, ∂f, ∂̄f)‖₂ on the same nodes
    double residual_scale = 0.0;   ///< max(‖f‖∞, ‖∂f‖∞, ‖∂̄f‖∞) on the same nodes
    double g_min = 0.0, g_max = 0.0;
    double C_hat = 0.0;            ///< max|φ| / (‖A‖∞ + ‖B‖∞)
    double coef_norm = 0.0;        ///< ‖A‖∞ + ‖B‖∞ on the mask
    double reconstruction = 0.0;   ///< ‖fg − w‖∞ / ‖w‖∞
    double chain_dbar = 0.0;       ///< ‖∂̄f − (∂̄w − ωw)e^{−φ}‖∞ (interior)
    double chain_d = 0.0;          ///< ‖∂f − (∂w − (Sω)w)e^{−φ}‖∞ (interior)
    IntegralSolve solve;
};

SimilarityFactorization factorize(const ComplexField& w, const GeneralizedBeltramiEq& eq, const DomainMask& mask,
                                  const IntegralOptions& opt = {}, int interior_cells = 2);

} // namespace landis
