#include "landis/similarity.hpp"

#include <algorithm>
#include <cmath>

namespace landis {

void GeneralizedBeltramiEq::validate() const {
    if (!(alpha0 >= 0.0 && alpha0 < 1.0))
        throw HypothesisError("similarity", "alpha0 must lie in [0, 1)");
    require_same_grid(q1.spec(), q2.spec(), "similarity");
    require_same_grid(q1.spec(), Acoef.spec(), "similarity");
    require_same_grid(q1.spec(), Bcoef.spec(), "similarity");
    for (std::size_t k = 0; k < q1.size(); ++k)
        if (std::abs(q1[k]) + std::abs(q2[k]) > alpha0 * (1 + 1e-12))
            throw HypothesisError("similarity", "|q1| + |q2| exceeds alpha0 = " + std::to_string(alpha0));
}

ReducedCoefficients reduce_coefficients(const ComplexField& w, const GeneralizedBeltramiEq& eq) {
    require_same_grid(w.spec(), eq.q1.spec(), "reduce_coefficients");
    auto dw = wirtinger(w).d;
    std::vector<Complex> h(w.size()), q0(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        Complex wk = w[k], d = dw[k];
        h[k] = (wk != 0.0) ? eq.Acoef[k] + eq.Bcoef[k] * std::conj(wk) / wk : eq.Acoef[k] + eq.Bcoef[k];
        q0[k] = (d != 0.0) ? eq.q1[k] + eq.q2[k] * std::conj(d) / d : eq.q1[k] + eq.q2[k];
    }
    return {ComplexField(w.spec(), std::move(h)), ComplexField(w.spec(), std::move(q0))};
}

namespace {

ComplexField restrict_to(const ComplexField& f, const DomainMask& mask) {
    std::vector<Complex> out(f.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = mask.inside(k) ? f[k] : Complex(0.0);
    return {f.spec(), std::move(out)};
}

} // namespace

IntegralSolve solve_integral_equation(const ComplexField& h, const ComplexField& q0, const DomainMask& mask,
                                      double alpha0, const IntegralOptions& opt) {
    require_same_grid(h.spec(), mask.spec(), "integral_equation");
    require_same_grid(q0.spec(), mask.spec(), "integral_equation");
    IntegralSolve out;
    out.Cp = opt.Cp ? *opt.Cp : operator_norm_probe(mask, opt.p, opt.probe_trials, opt.probe_seed).estimate;
    out.contraction_bound = out.Cp * alpha0;
    if (out.contraction_bound >= 1.0)
        throw HypothesisError("integral_equation", "contraction precondition fails: probed C_p = " +
                                                       std::to_string(out.Cp) + ", C_p * alpha0 = " +
                                                       std::to_string(out.contraction_bound));
    auto hm = restrict_to(h, mask);
    const double tol = opt.tol * std::max(1.0, hm.max_abs());
    ComplexField omega = hm;
    double prev_lp = -1.0;
    for (int k = 1; k <= opt.kmax; ++k) {
        auto next = restrict_to(hm - q0 * beurling_S(omega, mask), mask);
        auto diff = next - omega;
        double inc = diff.max_abs();
        double lp = lp_norm(diff, mask, opt.p);
        out.increments.push_back(inc);
        if (prev_lp > 0.0 && k > 2 && inc > 1e3 * tol)
            out.observed_ratio = std::max(out.observed_ratio, lp / prev_lp);
        prev_lp = lp;
        omega = std::move(next);
        out.iterations = k;
        if (inc <= tol) {
            out.omega = std::move(omega);
            return out;
        }
    }
    throw SolverError("integral_equation", "no convergence in " + std::to_string(opt.kmax) +
                                               " iterations (last increment " + std::to_string(out.increments.back()) + ")");
}

SimilarityFactorization factorize(const ComplexField& w, const GeneralizedBeltramiEq& eq, const DomainMask& mask,
                                  const IntegralOptions& opt, int interior_cells) {
    eq.validate();
    require_same_grid(w.spec(), mask.spec(), "factorize");
    SimilarityFactorization r;
    auto red = reduce_coefficients(w, eq);
    r.h = red.h;
    r.q0 = red.q0;
    r.solve = solve_integral_equation(r.h, r.q0, mask, eq.alpha0, opt);
    r.omega = r.solve.omega;
    r.phi = cauchy_T(r.omega, mask);
    r.g = r.phi.map([](Complex z) { return std::exp(z); });
    r.f = w * r.phi.map([](Complex z) { return std::exp(-z); });
    auto Somega = beurling_S(r.omega, mask);

    const auto& s = w.spec();
    auto Wf = wirtinger(r.f);
    auto Ww = wirtinger(w);
    double sq_res = 0.0, sq_scale = 0.0;
    double wmax = 0.0, fg = 0.0, amax = 0.0, bmax = 0.0, phimax = 0.0;
    r.g_min = 1e300;
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i) {
            auto k = s.index(i, j);
            if (!mask.inside(k))
                continue;
            wmax = std::max(wmax, std::abs(w[k]));
            fg = std::max(fg, std::abs(r.f[k] * r.g[k] - w[k]));
            amax = std::max(amax, std::abs(eq.Acoef[k]));
            bmax = std::max(bmax, std::abs(eq.Bcoef[k]));
            phimax = std::max(phimax, std::abs(r.phi[k]));
            double ag = std::abs(r.g[k]);
            r.g_min = std::min(r.g_min, ag);
            r.g_max = std::max(r.g_max, ag);
            if (!mask.interior(i, j, interior_cells))
                continue;
            double res = std::abs(Wf.dbar[k] + r.q0[k] * Wf.d[k]);
            r.residual_f = std::max(r.residual_f, res);
            sq_res += res * res;
            sq_scale += std::norm(r.f[k]) + std::norm(Wf.d[k]) + std::norm(Wf.dbar[k]);
            r.residual_scale = std::max({r.residual_scale, std::abs(r.f[k]), std::abs(Wf.d[k]), std::abs(Wf.dbar[k])});
            Complex e = std::exp(-r.phi[k]);
            r.chain_dbar = std::max(r.chain_dbar, std::abs(Wf.dbar[k] - (Ww.dbar[k] - r.omega[k] * w[k]) * e));
            r.chain_d = std::max(r.chain_d, std::abs(Wf.d[k] - (Ww.d[k] - Somega[k] * w[k]) * e));
        }
    r.residual_f_rms = sq_scale > 0 ? std::sqrt(sq_res / sq_scale) : 0.0;
    r.coef_norm = amax + bmax;
    r.C_hat = r.coef_norm > 0 ? phimax / r.coef_norm : 0.0;
    r.reconstruction = wmax > 0 ? fg / wmax : 0.0;
    return r;
}

} // namespace landis
