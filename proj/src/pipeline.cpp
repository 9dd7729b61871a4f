#include "landis/pipeline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace landis {

namespace {

const Complex I(0.0, 1.0);

bool inside_by(const GridSpec& s, int i, int j, int cells, const std::optional<Region>& region = {}) {
    return i >= cells && j >= cells && i <= s.nx - cells && j <= s.ny - cells &&
           (!region || region_contains(*region, s.node(i, j)));
}

double det_A_plus_I(const Mat2& a) { return (1 + a.a11) * (1 + a.a22) - a.a12 * a.a12; }

} // namespace

StreamFunction stream_function(const ScalarField& phi, const ScalarField& v, const CoefficientField& A,
                               const ScalarField* W1, const ScalarField* W2, double tol,
                               std::optional<Region> check_region) {
    require_same_grid(phi.spec(), v.spec(), "stream_function");
    require_same_grid(phi.spec(), A.spec(), "stream_function");
    if ((W1 == nullptr) != (W2 == nullptr))
        throw ConfigError("stream_function", "W needs both components");
    const auto& s = v.spec();
    auto vx = partial_x(v), vy = partial_y(v);
    auto p2 = phi * phi;
    auto F1 = p2 * (A.a11() * vx + A.a12() * vy);
    auto F2 = p2 * (A.a12() * vx + A.a22() * vy);
    if (W1) {
        F1 = F1 + p2 * (*W1) * v;
        F2 = F2 + p2 * (*W2) * v;
    }
    auto d1 = partial_x(F1), d2 = partial_y(F2);
    StreamFunction out;
    double num = 0.0, den = 0.0;
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i) {
            if (!inside_by(s, i, j, 2, check_region))
                continue;
            auto k = s.index(i, j);
            num = std::max(num, std::abs(d1[k] + d2[k]));
            den = std::max(den, std::abs(d1[k]) + std::abs(d2[k]));
        }
    out.divergence_residual = den > 0 ? num / den : 0.0;
    if (out.divergence_residual > tol)
        throw HypothesisError("stream_function", "flux is not divergence free (relative residual " +
                                                     std::to_string(out.divergence_residual) + ")");
    auto gx = -1.0 * F2;
    auto [ia, ja] = s.nearest({0.0, 0.0});
    out.vtilde = integrate_gradient(gx, F1, ia, ja);
    int margin = 2;
    if (check_region)
        if (const auto* ball = std::get_if<Ball>(&*check_region)) {
            double gap = std::min({ball->center.x - ball->radius - s.origin.x, ball->center.y - ball->radius - s.origin.y,
                                   s.origin.x + s.width() - ball->center.x - ball->radius,
                                   s.origin.y + s.height() - ball->center.y - ball->radius});
            margin = std::max(margin, static_cast<int>(gap / s.h));
        }
    out.path_defect = loop_defect(gx, F1, 50, 11, margin);
    auto tx = partial_x(out.vtilde), ty = partial_y(out.vtilde);
    double mis = 0.0, fmax = 0.0;
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i) {
            if (!inside_by(s, i, j, 2, check_region))
                continue;
            auto k = s.index(i, j);
            mis = std::max({mis, std::abs(tx[k] - gx[k]), std::abs(ty[k] - F1[k])});
            fmax = std::max({fmax, std::abs(F1[k]), std::abs(F2[k])});
        }
    out.component_residual = fmax > 0 ? mis / fmax : 0.0;
    return out;
}

WAlpha build_w_and_alpha(const ScalarField& phi, const ScalarField& v, const ScalarField& vtilde,
                         const CoefficientField& A, const ScalarField* W1, const ScalarField* W2,
                         std::optional<Region> check_region) {
    require_same_grid(phi.spec(), vtilde.spec(), "build_w");
    const auto& s = v.spec();
    WAlpha out;
    out.w = ComplexField(phi * phi * v, vtilde);
    auto psi = phi.map([](double p) { return std::log(p); });
    out.coef = apply_D(A, ComplexField(psi, ScalarField(s, 0.0)));
    if (W1 && W2) {
        std::vector<Complex> c(s.size());
        for (std::size_t k = 0; k < c.size(); ++k) {
            Mat2 a = A.at(k);
            double q = 2 * det_A_plus_I(a);
            c[k] = out.coef[k] + (a.a12 - I * (a.a11 + 1)) / q * (*W2)[k] + (-(a.a22 + 1) + I * a.a12) / q * (*W1)[k];
        }
        out.coef = ComplexField(s, std::move(c));
    }
    auto Dw = apply_D(A, out.w);
    auto wx = partial_x(out.w), wy = partial_y(out.w);
    double num = 0.0, den = 0.0;
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i) {
            auto k = s.index(i, j);
            if (!check_region || region_contains(*check_region, s.node(i, j)))
                out.sup_coef = std::max(out.sup_coef, std::abs(out.coef[k]));
            if (!inside_by(s, i, j, 2, check_region))
                continue;
            num = std::max(num, std::abs(Dw[k] - out.coef[k] * 2.0 * out.w[k].real()));
            den = std::max(den, std::abs(wx[k]) + std::abs(wy[k]));
        }
    out.residual = den > 0 ? num / den : 0.0;
    return out;
}

UpsilonResult upsilon_field(const CoefficientField& A, const ScalarField& W1, const ScalarField& W2,
                            const ScalarField& psi_x, const ScalarField& psi_y, const ScalarField& v,
                            std::optional<Region> check_region) {
    const auto& s = A.spec();
    for (std::size_t k = 0; k < s.size(); ++k)
        if (std::abs(A.detA()[k] - 1.0) > 1e-10)
            throw HypothesisError("upsilon", "requires det A = 1");
    auto vx = partial_x(v), vy = partial_y(v);
    std::vector<Complex> up(s.size()), ut(s.size()), dtv(s.size());
    std::vector<double> lhs(s.size());
    double dmax = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        Mat2 a = A.at(k);
        double r1 = W1[k] - 2 * (a.a11 * psi_x[k] + a.a12 * psi_y[k]);
        double r2 = W2[k] - 2 * (a.a12 * psi_x[k] + a.a22 * psi_y[k]);
        double q = det_A_plus_I(a);
        double e = ((1 + a.a22) * r1 - a.a12 * r2) / q;
        double f = (-a.a12 * r1 + (1 + a.a11) * r2) / q;
        up[k] = {e, f};
        dtv[k] = (1 + a.a11 - I * a.a12) * vx[k] + (a.a12 - I * (1 + a.a22)) * vy[k];
        lhs[k] = r1 * vx[k] + r2 * vy[k];
        dmax = std::max(dmax, std::abs(dtv[k]));
    }
    UpsilonResult out;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        Complex d = dtv[k];
        ut[k] = std::abs(d) > 1e-12 * dmax && d != 0.0 ? 0.5 * (up[k] + std::conj(up[k]) * std::conj(d) / d) : 0.0;
        num = std::max(num, std::abs(lhs[k] - ut[k] * d));
        den = std::max(den, std::abs(lhs[k]));
    }
    out.upsilon = ComplexField(s, std::move(up));
    out.upsilon_tilde = ComplexField(s, std::move(ut));
    out.identity_residual = den > 0 ? num / den : 0.0;
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i)
            if (!check_region || region_contains(*check_region, s.node(i, j)))
                out.sup_tilde = std::max(out.sup_tilde, std::abs(out.upsilon_tilde(i, j)));
    return out;
}

ThreeCircle three_quasi_circle(const ComplexField& f, const QuasiBallAtlas& atlas, double s1, double s2, double s3) {
    if (!(0 < s1 && s1 < s2 && s2 < s3))
        throw ConfigError("three_circle", "need 0 < s1 < s2 < s3");
    ThreeCircle r{s1, s2, s3};
    auto maxmod = [&](double sv) {
        if (!atlas.circles().count(sv))
            throw ConfigError("three_circle", "atlas has no circle at s = " + std::to_string(sv));
        double m = 0.0;
        for (const auto& p : atlas.circle(sv).vertices)
            m = std::max(m, std::abs(f.sample_cubic(p)));
        return m;
    };
    r.M1 = maxmod(s1);
    r.M2 = maxmod(s2);
    r.M3 = maxmod(s3);
    double l31 = std::log(s3 / s1), l32 = std::log(s3 / s2), l21 = std::log(s2 / s1);
    double g1 = std::log(r.M1), g2 = std::log(r.M2), g3 = std::log(r.M3);
    r.lhs = l31 * g2;
    r.rhs = l32 * g1 + l21 * g3;
    r.theta = l32 / l31;
    double den = std::max({std::abs(r.lhs), std::abs(r.rhs), l31 * std::abs(g3 - g1), 1e-300});
    r.rel_defect = (r.lhs - r.rhs) / den;
    return r;
}

// ---------------------------------------------------------------------------
// Problems

LandisProblem::Check LandisProblem::check() const {
    Check c;
    const auto& s = u.spec();
    auto r = apply_operator(A, P, variant, u);
    double amax = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
        amax = std::max(amax, A.at(k).max_eig());
    double wmax = P.has_W() ? std::max(P.W1().max_abs(), P.W2().max_abs()) : 0.0;
    double op = 8 * amax / (s.h * s.h) + 2 * wmax / s.h + P.M();
    double num = 0.0;
    for (int j = 1; j < s.ny; ++j)
        for (int i = 1; i < s.nx; ++i)
            num = std::max(num, std::abs(r(i, j)));
    c.residual = num / std::max(op * u.max_abs(), 1e-300);
    c.sup_b = sup_norm(u, Ball{{0, 0}, b});
    c.sup_d = sup_norm(u, Ball{{0, 0}, d});
    c.upper_ok = c.sup_d <= std::exp(C0 * std::sqrt(P.M())) * (1 + 1e-12);
    c.lower_ok = c.sup_b >= 1 - 1e-12;
    return c;
}

void LandisProblem::validate(double residual_tol) const {
    if (!(b > 0 && d > b))
        throw HypothesisError("problem", "need 0 < b < d");
    auto c = check();
    if (c.residual > residual_tol)
        throw HypothesisError("problem", "u does not solve the equation (relative residual " +
                                             std::to_string(c.residual) + ")");
    if (!c.upper_ok)
        throw HypothesisError("problem", "sup over B_d is " + std::to_string(c.sup_d) + ", above exp(C0 sqrt M)");
    if (!c.lower_ok)
        throw HypothesisError("problem", "sup over B_b is " + std::to_string(c.sup_b) + ", below 1");
}

ScalarField extremal_solution(const CoefficientField& A, const PotentialField& P, Variant variant, double b, double d,
                              double C0, const ExtremalOptions& opt) {
    const auto& s = A.spec();
    if (!(0 < opt.r0 && opt.r0 < b && b < d))
        throw ConfigError("extremal", "need 0 < r0 < b < d");
    DirichletSolver solver(A, P, variant);
    std::vector<ScalarField> basis;
    basis.push_back(solver.solve(ScalarField(s, 1.0)));
    for (int k = 1; k <= opt.modes; ++k) {
        basis.push_back(solver.solve(ScalarField::from_function(s, [k](double x, double y) {
            return std::cos(k * std::atan2(y, x));
        })));
        basis.push_back(solver.solve(ScalarField::from_function(s, [k](double x, double y) {
            return std::sin(k * std::atan2(y, x));
        })));
    }
    const int n = static_cast<int>(basis.size());
    Eigen::MatrixXd Gd = Eigen::MatrixXd::Zero(n, n), Gb = Gd, Gr = Gd;
    Eigen::VectorXd col(n);
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i) {
            double r = s.node(i, j).norm();
            if (r > d)
                continue;
            auto k = s.index(i, j);
            for (int m = 0; m < n; ++m)
                col[m] = basis[m][k];
            Eigen::MatrixXd outer = col * col.transpose();
            Gd += outer;
            if (r <= b)
                Gb += outer;
            if (r <= opt.r0)
                Gr += outer;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ed(Gd);
    const double emax = ed.eigenvalues().maxCoeff();
    std::vector<int> keep;
    for (int m = 0; m < n; ++m)
        if (ed.eigenvalues()[m] > 1e-13 * emax)
            keep.push_back(m);
    Eigen::MatrixXd T(n, static_cast<int>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
        T.col(static_cast<int>(c)) = ed.eigenvectors().col(keep[c]) / std::sqrt(ed.eigenvalues()[keep[c]]);
    Eigen::MatrixXd Bp = T.transpose() * Gb * T, Rp = T.transpose() * Gr * T;
    Bp = 0.5 * (Bp + Bp.transpose());
    Rp = 0.5 * (Rp + Rp.transpose());
    const Eigen::MatrixXd Id = Eigen::MatrixXd::Identity(Bp.rows(), Bp.cols());

    auto build = [&](double tau) {
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ge(Bp, Rp + tau * Id);
        Eigen::VectorXd c = T * ge.eigenvectors().col(ge.eigenvalues().size() - 1);
        std::vector<double> vals(s.size(), 0.0);
        for (int m = 0; m < n; ++m)
            for (std::size_t k = 0; k < vals.size(); ++k)
                vals[k] += c[m] * basis[m][k];
        ScalarField u(s, std::move(vals));
        double sb = sup_norm(u, Ball{{0, 0}, b});
        u = (1.0 / sb) * u;
        return u;
    };
    const double target = opt.target * std::exp(C0 * std::sqrt(P.M()));
    auto ratio = [&](const ScalarField& u) { return sup_norm(u, Ball{{0, 0}, d}); };
    double lo = std::log(1e-16), hi = std::log(1e4);
    auto ulo = build(std::exp(lo));
    if (ratio(ulo) <= target)
        return ulo;
    auto best = build(std::exp(hi));
    if (ratio(best) > target)
        throw HypothesisError("extremal", "no admissible combination reaches the B_d bound");
    for (int it = 0; it < opt.bisection; ++it) {
        double mid = 0.5 * (lo + hi);
        auto u = build(std::exp(mid));
        if (ratio(u) > target) {
            lo = mid;
        } else {
            hi = mid;
            best = std::move(u);
        }
    }
    return best;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ConfigError("loglog_slope", "need at least two matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        double lx = std::log(x[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Vanishing order

VanishingOrderReport vanishing_order_experiment(const LandisProblem& problem, const VanishingOptions& opt) {
    problem.validate();
    const auto& s = problem.u.spec();
    const auto& u = problem.u;
    VanishingOrderReport rep;
    rep.sqrtM = std::sqrt(problem.P.M());
    for (double r : opt.report_radii) {
        rep.radii.push_back(r);
        rep.sup_ball.push_back(sup_norm(u, Ball{{0, 0}, r}));
    }
    std::vector<double> fit;
    for (double r : opt.fit_radii)
        fit.push_back(sup_norm(u, Ball{{0, 0}, r}));
    rep.kappa_hat = loglog_slope(opt.fit_radii, fit);
    rep.kappa_over_sqrtM = rep.kappa_hat / rep.sqrtM;
    if (problem.atlas)
        for (const auto& [sv, poly] : problem.atlas->circles())
            rep.sup_quasi[sv] = sup_norm(u, poly);

    const double rho = problem.atlas && problem.atlas->rho_map().count(1.4) ? problem.atlas->rho_hat(1.4)
                                                                            : problem.d - 0.4;
    const Region inner = Ball{{0, 0}, rho};
    const double omega_r = std::min(rho + 0.2, problem.d - 0.2);

    CoefficientField A = problem.A;
    PotentialField P = problem.P;
    ScalarField W1(s, 0.0), W2(s, 0.0);
    bool use_W = problem.variant != Variant::electric && P.has_W();
    if (use_W) {
        W1 = P.W1();
        W2 = P.W2();
    }
    if (problem.variant == Variant::nondiv_magnetic) {
        double dev = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k)
            dev = std::max(dev, std::abs(A.detA()[k] - 1.0));
        if (dev > 1e-10) {
            auto nrm = normalize_det(A, P);
            A = nrm.A;
            W1 = nrm.W1;
            W2 = nrm.W2;
            double Mn = std::max({nrm.V.max_abs(), W1.max_abs() * W1.max_abs() + W2.max_abs() * W2.max_abs(), 1.0});
            P = PotentialField(nrm.V, Mn, W1, W2);
            use_W = true;
        }
        rep.stages["normalize.det_deviation"] = dev;
    }

    auto mult = positive_multiplier(A, P, problem.variant, inner);
    rep.stages["multiplier.c1"] = mult.c1;
    rep.stages["multiplier.C1"] = mult.C1;
    rep.stages["multiplier.min"] = mult.min_phi;
    rep.stages["multiplier.max"] = mult.max_phi;
    rep.stages["multiplier.envelope_ok"] = mult.envelope_ok ? 1.0 : 0.0;
    rep.stages["multiplier.residual"] = mult.solve.residual;
    const auto& phi = mult.phi;
    ScalarField v = u * phi.map([](double p) { return 1.0 / p; });

    ComplexField w, Acoef, Bcoef;
    if (problem.variant != Variant::nondiv_magnetic) {
        rep.route = "stream";
        const ScalarField* w1 = use_W ? &W1 : nullptr;
        const ScalarField* w2 = use_W ? &W2 : nullptr;
        auto st = stream_function(phi, v, A, w1, w2, opt.stream_tol, Region(Ball{{0, 0}, omega_r}));
        rep.stages["stream.divergence_residual"] = st.divergence_residual;
        rep.stages["stream.component_residual"] = st.component_residual;
        rep.stages["stream.path_defect"] = st.path_defect;
        auto wa = build_w_and_alpha(phi, v, st.vtilde, A, w1, w2, Region(Ball{{0, 0}, omega_r}));
        rep.stages["w.residual"] = wa.residual;
        rep.stages["w.sup_coef"] = wa.sup_coef;
        rep.stages["w.sup_coef_over_sqrtM"] = wa.sup_coef / rep.sqrtM;
        w = wa.w;
        Acoef = wa.coef;
        Bcoef = wa.coef;
    } else {
        rep.route = "gradient";
        auto lr = log_derivative_report(A, phi, P, problem.variant, inner);
        rep.stages["psi.sup_grad"] = lr.sup_grad;
        rep.stages["psi.residual"] = lr.residual;
        auto up = upsilon_field(A, W1, W2, lr.psi_x, lr.psi_y, v, inner);
        rep.stages["upsilon.sup"] = up.sup_tilde;
        rep.stages["upsilon.sup_over_sqrtM"] = up.sup_tilde / rep.sqrtM;
        rep.stages["upsilon.identity_residual"] = up.identity_residual;
        auto dec = decompose_L(A);
        w = apply_Dtilde(dec, v);
        Acoef = up.upsilon_tilde - dec.Wtilde;
        Bcoef = ComplexField(s, Complex(0.0));

        // |D̃v| = |(I + A)∇v|, so the ratio to |∇v| lies in [1 + λ_min, 1 + λ_max]
        auto vx = partial_x(v), vy = partial_y(v);
        double rmin = 1e300, rmax = 0.0, viol = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            double g = std::hypot(vx[k], vy[k]);
            if (g == 0.0)
                continue;
            double q = std::abs(w[k]) / g;
            Mat2 a = A.at(k);
            rmin = std::min(rmin, q);
            rmax = std::max(rmax, q);
            viol = std::max({viol, (1 + a.min_eig()) - q, q - (1 + a.max_eig())});
        }
        rep.stages["dtilde.ratio_min"] = rmin;
        rep.stages["dtilde.ratio_max"] = rmax;
        if (viol > 1e-9 * rmax)
            throw HypothesisError("gradient", "|D~v| ~ |grad v| equivalence violated by " + std::to_string(viol));

        // two cases on Q_{6/5}
        const double a = 0.5 * std::exp(-2 * mult.C1 * rep.sqrtM);
        Region q65 = problem.atlas && problem.atlas->circles().count(1.2) ? Region(problem.atlas->circle(1.2))
                                                                          : Region(Ball{{0, 0}, 1.2 * problem.b});
        double umin = 1e300;
        ScalarField gradv(s, 0.0);
        {
            std::vector<double> g(s.size());
            for (std::size_t k = 0; k < s.size(); ++k)
                g[k] = std::hypot(vx[k], vy[k]);
            gradv = ScalarField(s, std::move(g));
        }
        for (int j = 0; j <= s.ny; ++j)
            for (int i = 0; i <= s.nx; ++i)
                if (region_contains(q65, s.node(i, j)))
                    umin = std::min(umin, u(i, j));
        rep.stages["gradient.a"] = a;
        rep.stages["gradient.case"] = umin >= a ? 1.0 : 2.0;
        rep.stages["gradient.sup_grad_v"] = sup_norm(gradv, q65);
        rep.stages["gradient.lower_bound"] = 0.5 * std::exp(-mult.C1 * rep.sqrtM);
    }

    DomainMask mask(s, Ball{{0, 0}, omega_r});
    auto bc = eta_nu_from_A(A);
    GeneralizedBeltramiEq eq{bc.eta, bc.nu, Acoef, Bcoef, std::min(bc.max_sum() + 1e-12, 1.0 - 1e-12)};
    auto fac = factorize(w, eq, mask, opt.integral);
    rep.stages["factor.iterations"] = fac.solve.iterations;
    rep.stages["factor.Cp"] = fac.solve.Cp;
    rep.stages["factor.contraction_bound"] = fac.solve.contraction_bound;
    rep.stages["factor.observed_ratio"] = fac.solve.observed_ratio;
    rep.stages["factor.reconstruction"] = fac.reconstruction;
    rep.stages["factor.residual_f"] = fac.residual_scale > 0 ? fac.residual_f / fac.residual_scale : 0.0;
    rep.stages["factor.residual_f_rms"] = fac.residual_f_rms;
    rep.stages["factor.C_hat"] = fac.C_hat;
    rep.stages["factor.log_g_min"] = std::log(fac.g_min);
    rep.stages["factor.log_g_max"] = std::log(fac.g_max);
    rep.stages["factor.coef_norm"] = fac.coef_norm;

    HatOperator H{fac.q0.re(), fac.q0.im(), 1.0};
    auto Ahat = hatA_from_hat(H);
    auto F = fundamental_solution(Ahat, {0.0, 0.0}, omega_r);
    QuasiBallAtlas hat_atlas(F, {opt.s1, opt.s2, opt.s3});
    double reach = circumradius(hat_atlas.circle(opt.s3), {0, 0});
    rep.stages["three_circle.outer_circumradius"] = reach;
    if (reach > omega_r)
        throw GeometryError("three_circle", "outer quasi-circle leaves the similarity domain");
    rep.three_circle = three_quasi_circle(fac.f, hat_atlas, opt.s1, opt.s2, opt.s3);
    rep.theta = rep.three_circle.theta;
    rep.stages["three_circle.rel_defect"] = rep.three_circle.rel_defect;
    return rep;
}

// ---------------------------------------------------------------------------
// Shift and scale, scans

ShiftScaled shift_scale(const ScalarField& u, const CoefficientField& A, const PotentialField& P, Point z0, double R,
                        double a, double b, double d, MagneticScaling ws) {
    if (!(a > 0 && R > 0))
        throw ConfigError("shift_scale", "need a, R > 0");
    if (1.0 / a > b)
        throw ConfigError("shift_scale", "need 1/a <= b");
    const auto& s = u.spec();
    require_same_grid(s, A.spec(), "shift_scale");
    auto node_of = [&](Point p) {
        auto [i, j] = s.nearest(p);
        auto q = s.node(i, j);
        if (std::abs(q.x - p.x) > 1e-9 * s.h || std::abs(q.y - p.y) > 1e-9 * s.h)
            throw GeometryError("shift_scale", "point is not a grid node");
        return std::pair<int, int>{i, j};
    };
    auto [i0, j0] = node_of(z0);
    auto [io, jo] = node_of({0.0, 0.0});
    const double scale = a * R;
    const int m = static_cast<int>(std::ceil(d * scale / s.h - 1e-9));
    if (i0 - m < 0 || j0 - m < 0 || i0 + m > s.nx || j0 + m > s.ny)
        throw GeometryError("shift_scale", "window does not cover B_{d aR}(z0)");
    if (std::abs(io - i0) > m || std::abs(jo - j0) > m)
        throw GeometryError("shift_scale", "origin falls outside the rescaled window");
    const double hR = s.h / scale;
    GridSpec sub({-m * hR, -m * hR}, 2 * m, 2 * m, hR);
    auto pick = [&](const ScalarField& f, double factor) {
        std::vector<double> out(sub.size());
        for (int j = 0; j <= 2 * m; ++j)
            for (int i = 0; i <= 2 * m; ++i)
                out[sub.index(i, j)] = factor * f(i0 - m + i, j0 - m + j);
        return ScalarField(sub, std::move(out));
    };
    ShiftScaled r;
    r.scale = scale;
    r.M = scale * scale * P.M();
    r.A = CoefficientField(pick(A.a11(), 1.0), pick(A.a12(), 1.0), pick(A.a22(), 1.0), A.lambda());
    if (P.has_W()) {
        double wf = ws == MagneticScaling::aR ? scale : R;
        r.P = PotentialField(pick(P.V(), scale * scale), r.M, pick(P.W1(), wf), pick(P.W2(), wf));
    } else {
        r.P = PotentialField(pick(P.V(), scale * scale), r.M);
    }
    r.u = pick(u, 1.0);
    r.z1 = {-z0.x / scale, -z0.y / scale};
    r.u_at_z1 = r.u(io - (i0 - m), jo - (j0 - m));
    r.u_at_origin = u(io, jo);
    return r;
}

LandisScan landis_scan(const ScalarField& u, const std::vector<double>& R_list, int angles) {
    const auto& s = u.spec();
    LandisScan out;
    for (double R : R_list) {
        if (!(R > 1.0))
            throw ConfigError("landis_scan", "radii must exceed 1");
        double inf = 1e300;
        for (int k = 0; k < angles; ++k) {
            double t = 2 * std::numbers::pi * k / angles;
            Point z0{R * std::cos(t), R * std::sin(t)};
            if (!s.contains({z0.x - 1, z0.y - 1}) || !s.contains({z0.x + 1, z0.y + 1}))
                throw GeometryError("landis_scan", "B_1(z0) leaves the window at R = " + std::to_string(R));
            inf = std::min(inf, sup_norm(u, Ball{z0, 1.0}));
        }
        ScanRow row{R, inf, -std::log(inf) / (R * std::log(R))};
        out.C_envelope = std::max(out.C_envelope, row.C_hat);
        out.rows.push_back(row);
    }
    return out;
}

} // namespace landis
