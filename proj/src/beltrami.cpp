#include "landis/beltrami.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace landis {

namespace {
const Complex I(0.0, 1.0);
}

std::pair<Complex, Complex> eta_nu(const Mat2& A) {
    double dAI = A.det() + A.trace() + 1.0;
    return {Complex(A.a11 - A.a22, 2 * A.a12) / dAI, Complex((A.det() - 1.0) / dAI, 0.0)};
}

double BeltramiCoefficients::max_sum() const {
    double m = 0.0;
    for (std::size_t k = 0; k < eta.size(); ++k)
        m = std::max(m, std::abs(eta[k]) + std::abs(nu[k]));
    return m;
}

BeltramiCoefficients eta_nu_from_A(const CoefficientField& A) {
    std::vector<Complex> e(A.a11().size()), n(A.a11().size());
    for (std::size_t k = 0; k < e.size(); ++k)
        std::tie(e[k], n[k]) = eta_nu(A.at(k));
    return {ComplexField(A.spec(), std::move(e)), ComplexField(A.spec(), std::move(n)), A.lambda()};
}

ComplexField apply_D(const CoefficientField& A, const ComplexField& f, DForm form) {
    require_same_grid(A.spec(), f.spec(), "apply_D");
    const std::size_t n = f.size();
    std::vector<Complex> out(n);
    if (form == DForm::definition) {
        auto W = wirtinger(f);
        for (std::size_t k = 0; k < n; ++k) {
            auto [eta, nu] = eta_nu(A.at(k));
            out[k] = W.dbar[k] + eta * W.d[k] + nu * std::conj(W.d[k]);
        }
        return {f.spec(), std::move(out)};
    }
    auto fx = partial_x(f), fy = partial_y(f);
    for (std::size_t k = 0; k < n; ++k) {
        Mat2 a = A.at(k);
        double dAI = a.det() + a.trace() + 1.0;
        Complex cvx = Complex(a.a11 + 1, a.a12) / dAI;
        Complex cvy = Complex(a.a12, a.a22 + 1) / dAI;
        if (form == DForm::det_one) {
            out[k] = cvx * fx[k] + cvy * fy[k];
        } else {
            Complex cux = Complex(a.a11 + a.det(), a.a12) / dAI;
            Complex cuy = Complex(a.a12, a.a22 + a.det()) / dAI;
            out[k] = cux * fx[k].real() + cuy * fy[k].real() + cvx * I * fx[k].imag() + cvy * I * fy[k].imag();
        }
    }
    return {f.spec(), std::move(out)};
}

double HatOperator::max_modulus() const {
    double m = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k)
        m = std::max(m, std::hypot(alpha[k], beta[k]));
    return m;
}

HatOperator eta_w_field(const CoefficientField& A, const ComplexField& w) {
    require_same_grid(A.spec(), w.spec(), "eta_w");
    auto dw = wirtinger(w).d;
    const double cut = 1e-12 * dw.max_abs();
    std::vector<double> al(w.size()), be(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        auto [eta, nu] = eta_nu(A.at(k));
        Complex d = dw[k];
        Complex ew = (std::abs(d) > cut && std::abs(d) > 0.0) ? eta + nu * std::conj(d) / d : eta + nu;
        al[k] = ew.real();
        be[k] = ew.imag();
    }
    return {ScalarField(w.spec(), std::move(al)), ScalarField(w.spec(), std::move(be)), A.lambda()};
}

Mat2 hat_matrix(double alpha, double beta) {
    double den = 1.0 - alpha * alpha - beta * beta;
    if (!(den > 0.0))
        throw HypothesisError("hat_operator", "alpha^2 + beta^2 must be below 1");
    return {((1 + alpha) * (1 + alpha) + beta * beta) / den, 2 * beta / den,
            ((1 - alpha) * (1 - alpha) + beta * beta) / den};
}

CoefficientField hatA_from_hat(const HatOperator& H) {
    const auto& s = H.alpha.spec();
    std::vector<double> a(s.size()), b(s.size()), c(s.size());
    double lam = H.lambda;
    for (std::size_t k = 0; k < a.size(); ++k) {
        Mat2 m = hat_matrix(H.alpha[k], H.beta[k]);
        a[k] = m.a11;
        b[k] = m.a12;
        c[k] = m.a22;
        double r = std::hypot(H.alpha[k], H.beta[k]);
        lam = std::min(lam, (1 - r) / (1 + r) * (1 - 1e-12));
    }
    return {ScalarField(s, std::move(a)), ScalarField(s, std::move(b)), ScalarField(s, std::move(c)), lam};
}

ComplexField apply_D_hat(const HatOperator& H, const ComplexField& f) {
    require_same_grid(H.alpha.spec(), f.spec(), "apply_D_hat");
    auto fx = partial_x(f), fy = partial_y(f);
    std::vector<Complex> out(f.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        double al = H.alpha[k], be = H.beta[k];
        out[k] = Complex(1 + al, be) * 0.5 * fx[k] + Complex(be, 1 - al) * 0.5 * fy[k];
    }
    return {f.spec(), std::move(out)};
}

ScalarField integrate_gradient(const ScalarField& gx, const ScalarField& gy, int ia, int ja) {
    const auto& s = gx.spec();
    const double hh = 0.5 * s.h;
    std::vector<double> v1(s.size()), v2(s.size());
    // row first
    std::vector<double> base(s.nodes_x());
    base[ia] = 0.0;
    for (int i = ia + 1; i <= s.nx; ++i)
        base[i] = base[i - 1] + hh * (gx(i - 1, ja) + gx(i, ja));
    for (int i = ia - 1; i >= 0; --i)
        base[i] = base[i + 1] - hh * (gx(i + 1, ja) + gx(i, ja));
    for (int i = 0; i <= s.nx; ++i) {
        v1[s.index(i, ja)] = base[i];
        for (int j = ja + 1; j <= s.ny; ++j)
            v1[s.index(i, j)] = v1[s.index(i, j - 1)] + hh * (gy(i, j - 1) + gy(i, j));
        for (int j = ja - 1; j >= 0; --j)
            v1[s.index(i, j)] = v1[s.index(i, j + 1)] - hh * (gy(i, j + 1) + gy(i, j));
    }
    // column first
    std::vector<double> col(s.nodes_y());
    col[ja] = 0.0;
    for (int j = ja + 1; j <= s.ny; ++j)
        col[j] = col[j - 1] + hh * (gy(ia, j - 1) + gy(ia, j));
    for (int j = ja - 1; j >= 0; --j)
        col[j] = col[j + 1] - hh * (gy(ia, j + 1) + gy(ia, j));
    for (int j = 0; j <= s.ny; ++j) {
        v2[s.index(ia, j)] = col[j];
        for (int i = ia + 1; i <= s.nx; ++i)
            v2[s.index(i, j)] = v2[s.index(i - 1, j)] + hh * (gx(i - 1, j) + gx(i, j));
        for (int i = ia - 1; i >= 0; --i)
            v2[s.index(i, j)] = v2[s.index(i + 1, j)] - hh * (gx(i + 1, j) + gx(i, j));
    }
    for (std::size_t k = 0; k < v1.size(); ++k)
        v1[k] = 0.5 * (v1[k] + v2[k]);
    return {s, std::move(v1)};
}

double loop_defect(const ScalarField& gx, const ScalarField& gy, int loops, std::uint64_t seed, int margin) {
    const auto& s = gx.spec();
    if (s.nx - 2 * margin < 4 || s.ny - 2 * margin < 4)
        throw GeometryError("loop_defect", "margin leaves no room for loops");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> Ux(margin, s.nx - margin), Uy(margin, s.ny - margin);
    const double hh = 0.5 * s.h;
    double worst = 0.0;
    for (int l = 0; l < loops; ++l) {
        int i0, i1, j0, j1;
        do {
            i0 = Ux(rng);
            i1 = Ux(rng);
            j0 = Uy(rng);
            j1 = Uy(rng);
            if (i0 > i1)
                std::swap(i0, i1);
            if (j0 > j1)
                std::swap(j0, j1);
        } while (i1 - i0 < 4 || j1 - j0 < 4);
        double circ = 0.0, mass = 0.0;
        for (int i = i0; i < i1; ++i) {
            circ += hh * (gx(i, j0) + gx(i + 1, j0)) - hh * (gx(i, j1) + gx(i + 1, j1));
            mass += hh * (std::abs(gx(i, j0)) + std::abs(gx(i + 1, j0)) + std::abs(gx(i, j1)) + std::abs(gx(i + 1, j1)));
        }
        for (int j = j0; j < j1; ++j) {
            circ += hh * (gy(i1, j) + gy(i1, j + 1)) - hh * (gy(i0, j) + gy(i0, j + 1));
            mass += hh * (std::abs(gy(i1, j)) + std::abs(gy(i1, j + 1)) + std::abs(gy(i0, j)) + std::abs(gy(i0, j + 1)));
        }
        if (mass > 0)
            worst = std::max(worst, std::abs(circ) / mass);
    }
    return worst;
}

HatSample hat_holomorphic_sample(const HatOperator& H, const ScalarField& boundary, Point anchor, int audit_loops,
                                 std::uint64_t audit_seed, double max_loop_defect) {
    auto Ahat = hatA_from_hat(H);
    const auto& s = Ahat.spec();
    auto u = solve_dirichlet(Ahat, PotentialField::zero(s), Variant::electric, boundary);
    auto ux = partial_x(u), uy = partial_y(u);
    auto vy = Ahat.a11() * ux + Ahat.a12() * uy;
    auto vx = -1.0 * (Ahat.a12() * ux + Ahat.a22() * uy);
    auto [ia, ja] = s.nearest(anchor);
    auto v = integrate_gradient(vx, vy, ia, ja);
    HatSample out;
    out.f = ComplexField(u, v);
    if (audit_loops > 0) {
        out.loop_defect = loop_defect(vx, vy, audit_loops, audit_seed);
        if (out.loop_defect > max_loop_defect)
            throw SolverError("hat_holomorphic_sample", "path-independence defect " + std::to_string(out.loop_defect) +
                                                            " above tolerance");
    }
    auto r = apply_D_hat(H, out.f);
    for (int j = 2; j <= s.ny - 2; ++j)
        for (int i = 2; i <= s.nx - 2; ++i)
            out.residual = std::max(out.residual, std::abs(r(i, j)));
    return out;
}

// ---------------------------------------------------------------------------
// Decomposition

Complex wtilde_closed_form(const Mat2& A, double a11x, double a11y, double a12x, double a12y) {
    const double a11 = A.a11, a12 = A.a12, a22 = A.a22;
    const double dAI = A.det() + A.trace() + 1.0;
    const double P = a11 + a22 + 2 * a11 * a22;
    const double Q = 2 * a12 * (1 + a11);
    const double R = a12 * (a22 - a11);
    const double S = (1 + a11) * (1 + a11) - a12 * a12;
    Complex num(P * a11x - Q * a12x + R * a11y + S * a12y, R * a11x + S * a12x - P * a11y + Q * a12y);
    return num / (a11 * dAI * dAI);
}

Decomposition decompose_L(const CoefficientField& A) {
    double worst = 0.0;
    for (double d : A.detA().values())
        worst = std::max(worst, std::abs(d - 1.0));
    if (worst > 1e-10)
        throw HypothesisError("decompose_L", "det A must equal 1 (deviation " + std::to_string(worst) + ")");
    auto a11x = partial_x(A.a11()), a11y = partial_y(A.a11());
    auto a12x = partial_x(A.a12()), a12y = partial_y(A.a12());
    const auto& s = A.spec();
    std::vector<Complex> cx(s.size()), cy(s.size()), W(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        Mat2 a = A.at(k);
        cx[k] = Complex(1 + a.a11, -a.a12);
        cy[k] = Complex(a.a12, -(1 + a.a22));
        W[k] = wtilde_closed_form(a, a11x[k], a11y[k], a12x[k], a12y[k]);
    }
    return {ComplexField(s, std::move(cx)), ComplexField(s, std::move(cy)), ComplexField(s, std::move(W))};
}

ComplexField apply_Dtilde(const Decomposition& dec, const ScalarField& u) {
    auto ux = partial_x(u), uy = partial_y(u);
    std::vector<Complex> out(u.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = dec.cx[k] * ux[k] + dec.cy[k] * uy[k];
    return {u.spec(), std::move(out)};
}

ComplexField compose_decomposition(const CoefficientField& A, const Decomposition& dec, const ScalarField& u) {
    auto g = apply_Dtilde(dec, u);
    return apply_D(A, g, DForm::det_one) + dec.Wtilde * g;
}

} // namespace landis
