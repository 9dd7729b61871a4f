#include "landis/elliptic.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace landis {

double Mat2::min_eig() const {
    double m = 0.5 * trace();
    double r = std::hypot(0.5 * (a11 - a22), a12);
    return m - r;
}

double Mat2::max_eig() const {
    double m = 0.5 * trace();
    double r = std::hypot(0.5 * (a11 - a22), a12);
    return m + r;
}

// ---------------------------------------------------------------------------
// Families

SmoothRandom::SmoothRandom(std::uint64_t seed, double freq_, int terms) : freq(freq_) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double total = 0.0;
    for (int t = 0; t < terms; ++t) {
        double dir = 2.0 * std::numbers::pi * U(rng);
        double k = freq * (0.5 + 0.5 * U(rng));
        double amp = 0.5 + 0.5 * U(rng);
        waves.push_back({k * std::cos(dir), k * std::sin(dir), 2.0 * std::numbers::pi * U(rng), amp});
        total += amp;
    }
    for (auto& w : waves)
        w.amp /= total;
}

double SmoothRandom::operator()(double x, double y) const {
    double s = 0.0;
    for (const auto& w : waves)
        s += w.amp * std::cos(w.kx * x + w.ky * y + w.phase);
    return s;
}

double SmoothRandom::gradient_bound() const {
    double g = 0.0;
    for (const auto& w : waves)
        g += w.amp * std::hypot(w.kx, w.ky);
    return g;
}

CoefficientFamily CoefficientFamily::identity() {
    return {"identity", 1.0, 0.0, [](double, double) { return Mat2{}; }};
}

CoefficientFamily CoefficientFamily::constant(const Mat2& a, double lambda) {
    if (a.min_eig() < lambda * (1 - 1e-12) || a.max_eig() > (1 + 1e-12) / lambda)
        throw HypothesisError("coefficients", "constant matrix violates the ellipticity bound");
    return {"constant", lambda, 0.0, [a](double, double) { return a; }};
}

CoefficientFamily CoefficientFamily::trig(double lambda, double mu, std::uint64_t seed, bool det_one) {
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw ConfigError("coefficients", "lambda must lie in (0, 1]");
    if (!(mu >= 0.0))
        throw ConfigError("coefficients", "mu must be nonnegative");
    const double L = 0.95 * std::log(1.0 / lambda);
    const double Lam = std::exp(L);
    SmoothRandom s1(seed * 3 + 1, 1.0), s2(seed * 3 + 2, 1.0), s3(seed * 3 + 3, 1.0);
    const double theta_amp = 0.5 * std::numbers::pi;
    // gradient bound at unit frequency; all three inputs scale linearly with k
    double g1 = L * s1.gradient_bound();
    double g2 = det_one ? g1 : L * s2.gradient_bound();
    double g3 = theta_amp * s3.gradient_bound();
    double G = Lam * (g1 + g2) + (Lam - 1.0 / Lam) * g3;
    double k = G > 0 ? std::min(2.0, 0.97 * mu / G) : 1.0;
    double realized_mu = G * k;
    auto eval = [=](double x, double y) {
        double l1 = L * s1(k * x, k * y);
        double l2 = det_one ? -l1 : L * s2(k * x, k * y);
        double th = theta_amp * s3(k * x, k * y);
        double c = std::cos(th), s = std::sin(th);
        double e1 = std::exp(l1), e2 = std::exp(l2);
        return Mat2{e1 * c * c + e2 * s * s, (e1 - e2) * c * s, e1 * s * s + e2 * c * c};
    };
    return {det_one ? "trig_det_one" : "trig", lambda, std::max(realized_mu, 0.0), eval};
}

PotentialFamily PotentialFamily::zero(double M) {
    return {M, false, [](double, double) { return 0.0; }, {}};
}

PotentialFamily PotentialFamily::constant(double M, double value) {
    return {M, false, [value](double, double) { return value; }, {}};
}

PotentialFamily PotentialFamily::random(double M, std::uint64_t seed, bool with_W, double freq) {
    if (!(M >= 1.0))
        throw ConfigError("potential", "M must be at least 1");
    SmoothRandom s(seed * 5 + 11, freq);
    PotentialFamily fam{M, with_W, [M, s](double x, double y) { return std::clamp(M * (0.5 + 0.5 * s(x, y)), 0.0, M); }, {}};
    if (with_W) {
        SmoothRandom w1(seed * 5 + 12, freq), w2(seed * 5 + 13, freq);
        double r = 0.97 * std::sqrt(M) / std::sqrt(2.0);
        fam.W = [r, w1, w2](double x, double y) { return std::array<double, 2>{r * w1(x, y), r * w2(x, y)}; };
    }
    return fam;
}

// ---------------------------------------------------------------------------
// CoefficientField

namespace {

// first-order one-sided on the edge, centred inside: each component is a
// difference quotient and so bounded by the Lipschitz constant
double max_grad(const ScalarField& f) {
    const auto& s = f.spec();
    double best = 0.0;
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i) {
            double gx = (i == 0)    ? (f(1, j) - f(0, j)) / s.h
                        : i == s.nx ? (f(s.nx, j) - f(s.nx - 1, j)) / s.h
                                    : (f(i + 1, j) - f(i - 1, j)) / (2 * s.h);
            double gy = (j == 0)    ? (f(i, 1) - f(i, 0)) / s.h
                        : j == s.ny ? (f(i, s.ny) - f(i, s.ny - 1)) / s.h
                                    : (f(i, j + 1) - f(i, j - 1)) / (2 * s.h);
            best = std::max(best, std::hypot(gx, gy));
        }
    return best;
}

} // namespace

CoefficientField::CoefficientField(ScalarField a11, ScalarField a12, ScalarField a22, double lambda, double mu)
    : a11_(std::move(a11)), a12_(std::move(a12)), a22_(std::move(a22)), lambda_(lambda), mu_(mu) {
    require_same_grid(a11_.spec(), a12_.spec(), "coefficients");
    require_same_grid(a11_.spec(), a22_.spec(), "coefficients");
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw HypothesisError("coefficients", "lambda must lie in (0, 1]");
    std::vector<double> det(a11_.size());
    const double lo = lambda * (1 - 1e-12), hi = (1 + 1e-12) / lambda;
    for (std::size_t k = 0; k < det.size(); ++k) {
        Mat2 m = at(k);
        det[k] = m.det();
        if (m.min_eig() < lo || m.max_eig() > hi)
            throw HypothesisError("coefficients", "ellipticity violated: eigenvalues [" + std::to_string(m.min_eig()) +
                                                      ", " + std::to_string(m.max_eig()) + "] outside [" +
                                                      std::to_string(lambda) + ", " + std::to_string(1 / lambda) + "]");
    }
    det_ = ScalarField(a11_.spec(), std::move(det));
    if (std::isfinite(mu))
        require_gradient_bound(mu);
}

CoefficientField CoefficientField::sample(const CoefficientFamily& fam, const GridSpec& spec) {
    std::vector<double> a(spec.size()), b(spec.size()), c(spec.size());
    for (int j = 0; j <= spec.ny; ++j)
        for (int i = 0; i <= spec.nx; ++i) {
            Mat2 m = fam(spec.x(i), spec.y(j));
            auto k = spec.index(i, j);
            a[k] = m.a11;
            b[k] = m.a12;
            c[k] = m.a22;
        }
    return {ScalarField(spec, std::move(a)), ScalarField(spec, std::move(b)), ScalarField(spec, std::move(c)),
            fam.lambda, fam.mu};
}

CoefficientField CoefficientField::identity(const GridSpec& spec) {
    return {ScalarField(spec, 1.0), ScalarField(spec, 0.0), ScalarField(spec, 1.0), 1.0, 0.0};
}

double CoefficientField::max_gradient() const {
    return std::max({max_grad(a11_), max_grad(a12_), max_grad(a22_)});
}

double CoefficientField::realized_lambda() const {
    double r = 1.0;
    for (std::size_t k = 0; k < a11_.size(); ++k) {
        Mat2 m = at(k);
        r = std::min({r, m.min_eig(), 1.0 / m.max_eig()});
    }
    return r;
}

void CoefficientField::require_gradient_bound(double bound) const {
    double g = max_gradient();
    if (g > 1.02 * bound + 1e-12)
        throw HypothesisError("coefficients", "gradient bound violated: max |grad a_ij| = " + std::to_string(g) +
                                                  " > " + std::to_string(bound));
}

// ---------------------------------------------------------------------------
// PotentialField

PotentialField::PotentialField(ScalarField V, double M, std::optional<ScalarField> W1, std::optional<ScalarField> W2)
    : V_(std::move(V)), W1_(std::move(W1)), W2_(std::move(W2)), M_(M) {
    if (!(M >= 1.0))
        throw HypothesisError("potential", "M must be at least 1");
    if (W1_.has_value() != W2_.has_value())
        throw HypothesisError("potential", "W needs both components");
    const double tol = 1e-12 * M;
    for (double v : V_.values()) {
        if (v < -tol)
            throw HypothesisError("potential", "V must be nonnegative (found " + std::to_string(v) + ")");
        if (v > M + tol)
            throw HypothesisError("potential", "|V| exceeds M");
    }
    if (W1_) {
        require_same_grid(V_.spec(), W1_->spec(), "potential");
        require_same_grid(V_.spec(), W2_->spec(), "potential");
        const double bound = std::sqrt(M) * (1 + 1e-12);
        for (std::size_t k = 0; k < V_.size(); ++k)
            if (std::hypot((*W1_)[k], (*W2_)[k]) > bound)
                throw HypothesisError("potential", "|W| exceeds sqrt(M)");
    }
}

PotentialField PotentialField::sample(const PotentialFamily& fam, const GridSpec& spec) {
    auto V = ScalarField::from_function(spec, fam.V);
    if (!fam.has_W)
        return {V, fam.M};
    auto W1 = ScalarField::from_function(spec, [&](double x, double y) { return fam.W(x, y)[0]; });
    auto W2 = ScalarField::from_function(spec, [&](double x, double y) { return fam.W(x, y)[1]; });
    return {V, fam.M, W1, W2};
}

PotentialField PotentialField::zero(const GridSpec& spec, double M) { return {ScalarField(spec, 0.0), M}; }

std::string to_string(Variant v) {
    switch (v) {
    case Variant::electric: return "electric";
    case Variant::div_magnetic: return "div_magnetic";
    case Variant::nondiv_magnetic: return "nondiv_magnetic";
    }
    return "?";
}

Variant parse_variant(const std::string& s) {
    if (s == "electric")
        return Variant::electric;
    if (s == "div_magnetic")
        return Variant::div_magnetic;
    if (s == "nondiv_magnetic")
        return Variant::nondiv_magnetic;
    throw ConfigError("variant", "unknown variant '" + s + "'");
}

// ---------------------------------------------------------------------------
// Stencils

namespace {

using Stencil = std::array<std::array<double, 3>, 3>;  // [di+1][dj+1]

double face(double a, double b) { return a > 0.0 && b > 0.0 ? 2.0 * a * b / (a + b) : 0.5 * (a + b); }

// a12 (∂x∂y + ∂y∂x) = 2∂ξ(a⁺∂ξ) + 2∂ζ(a⁻∂ζ) − ∂x(s∂x) − ∂y(s∂y) along the diagonals
// ξ, ζ with a⁺ − a⁻ = a12, a⁺ + a⁻ = s = √(a12² + ε²); smooth in a12, and the
// off-diagonal weights stay nonnegative while a11, a22 ≥ s
Stencil div_stencil(const CoefficientField& A, int i, int j) {
    Stencil w{};
    const double h2 = A.spec().h * A.spec().h;
    const auto& a11 = A.a11();
    const auto& a22 = A.a22();
    const auto& a12 = A.a12();
    auto split = [&](int p, int q) { return std::hypot(a12(p, q), 0.05 * (a11(p, q) + a22(p, q))); };
    auto cx = [&](int p, int q) { return a11(p, q) - split(p, q); };
    auto cy = [&](int p, int q) { return a22(p, q) - split(p, q); };
    auto pos = [&](int p, int q) { return 0.5 * (split(p, q) + a12(p, q)); };
    auto neg = [&](int p, int q) { return 0.5 * (split(p, q) - a12(p, q)); };
    double f[3][3] = {};
    f[2][1] = face(cx(i, j), cx(i + 1, j));
    f[0][1] = face(cx(i, j), cx(i - 1, j));
    f[1][2] = face(cy(i, j), cy(i, j + 1));
    f[1][0] = face(cy(i, j), cy(i, j - 1));
    f[2][2] = face(pos(i, j), pos(i + 1, j + 1));
    f[0][0] = face(pos(i, j), pos(i - 1, j - 1));
    f[0][2] = face(neg(i, j), neg(i - 1, j + 1));
    f[2][0] = face(neg(i, j), neg(i + 1, j - 1));
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            if (a == 1 && b == 1)
                continue;
            w[a][b] += f[a][b] / h2;
            w[1][1] -= f[a][b] / h2;
        }
    return w;
}

// variant lower-order terms added to an interior stencil
void add_lower_order(Stencil& w, const PotentialField& P, Variant variant, int i, int j, double h) {
    w[1][1] -= P.V()(i, j);
    if (variant == Variant::electric || !P.has_W())
        return;
    const auto& W1 = P.W1();
    const auto& W2 = P.W2();
    const double c = 1.0 / (2 * h);
    if (variant == Variant::div_magnetic) {
        w[2][1] += W1(i + 1, j) * c;
        w[0][1] -= W1(i - 1, j) * c;
        w[1][2] += W2(i, j + 1) * c;
        w[1][0] -= W2(i, j - 1) * c;
    } else {
        w[2][1] -= W1(i, j) * c;
        w[0][1] += W1(i, j) * c;
        w[1][2] -= W2(i, j) * c;
        w[1][0] += W2(i, j) * c;
    }
}

// second derivative along x with second-order one-sided ends
ScalarField second_x(const ScalarField& f) {
    const auto& s = f.spec();
    std::vector<double> out(f.size());
    const double ih2 = 1.0 / (s.h * s.h);
    for (int j = 0; j <= s.ny; ++j) {
        auto at = [&](int i) { return f(i, j); };
        out[s.index(0, j)] = (2 * at(0) - 5 * at(1) + 4 * at(2) - at(3)) * ih2;
        for (int i = 1; i < s.nx; ++i)
            out[s.index(i, j)] = (at(i + 1) - 2 * at(i) + at(i - 1)) * ih2;
        int n = s.nx;
        out[s.index(n, j)] = (2 * at(n) - 5 * at(n - 1) + 4 * at(n - 2) - at(n - 3)) * ih2;
    }
    return {s, std::move(out)};
}

ScalarField second_y(const ScalarField& f) {
    const auto& s = f.spec();
    std::vector<double> out(f.size());
    const double ih2 = 1.0 / (s.h * s.h);
    for (int i = 0; i <= s.nx; ++i) {
        auto at = [&](int j) { return f(i, j); };
        out[s.index(i, 0)] = (2 * at(0) - 5 * at(1) + 4 * at(2) - at(3)) * ih2;
        for (int j = 1; j < s.ny; ++j)
            out[s.index(i, j)] = (at(j + 1) - 2 * at(j) + at(j - 1)) * ih2;
        int n = s.ny;
        out[s.index(i, n)] = (2 * at(n) - 5 * at(n - 1) + 4 * at(n - 2) - at(n - 3)) * ih2;
    }
    return {s, std::move(out)};
}

double apply_stencil(const Stencil& w, const ScalarField& u, int i, int j) {
    double acc = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            if (w[a][b] != 0.0)
                acc += w[a][b] * u(i + a - 1, j + b - 1);
    return acc;
}

} // namespace

ScalarField apply_L_nondivergence(const CoefficientField& A, const ScalarField& u) {
    require_same_grid(A.spec(), u.spec(), "apply_L");
    auto ux = partial_x(u), uy = partial_y(u);
    auto uxx = second_x(u), uyy = second_y(u), uxy = partial_x(uy);
    auto b1 = partial_x(A.a11()) + partial_y(A.a12());
    auto b2 = partial_x(A.a12()) + partial_y(A.a22());
    std::vector<double> out(u.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = A.a11()[k] * uxx[k] + 2 * A.a12()[k] * uxy[k] + A.a22()[k] * uyy[k] + b1[k] * ux[k] + b2[k] * uy[k];
    return {u.spec(), std::move(out)};
}

ScalarField apply_L(const CoefficientField& A, const ScalarField& u) {
    auto out_field = apply_L_nondivergence(A, u);
    std::vector<double> out(out_field.values().begin(), out_field.values().end());
    const auto& s = u.spec();
    for (int j = 1; j < s.ny; ++j)
        for (int i = 1; i < s.nx; ++i)
            out[s.index(i, j)] = apply_stencil(div_stencil(A, i, j), u, i, j);
    return {s, std::move(out)};
}

ScalarField apply_operator(const CoefficientField& A, const PotentialField& P, Variant variant, const ScalarField& u) {
    require_same_grid(A.spec(), P.V().spec(), "apply_operator");
    // edge nodes: non-divergence expansion with one-sided lower-order terms
    auto base = apply_L_nondivergence(A, u) - P.V() * u;
    if (variant != Variant::electric && P.has_W()) {
        if (variant == Variant::div_magnetic)
            base = base + partial_x(P.W1() * u) + partial_y(P.W2() * u);
        else
            base = base - (P.W1() * partial_x(u) + P.W2() * partial_y(u));
    }
    std::vector<double> out(base.values().begin(), base.values().end());
    const auto& s = u.spec();
    for (int j = 1; j < s.ny; ++j)
        for (int i = 1; i < s.nx; ++i) {
            auto w = div_stencil(A, i, j);
            add_lower_order(w, P, variant, i, j, s.h);
            out[s.index(i, j)] = apply_stencil(w, u, i, j);
        }
    return {s, std::move(out)};
}

// ---------------------------------------------------------------------------
// Solver

struct DirichletSolver::Impl {
    GridSpec spec;
    Eigen::SparseMatrix<double> M;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    double row_norm = 0.0;
    double bscale = 1.0;
};

DirichletSolver::DirichletSolver(const CoefficientField& A, const PotentialField& P, Variant variant)
    : impl_(std::make_unique<Impl>()) {
    require_same_grid(A.spec(), P.V().spec(), "solve");
    const auto& s = A.spec();
    impl_->spec = s;
    const int n = static_cast<int>(s.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 9);
    double row_norm = 1.0;
    // boundary rows sized like interior diagonals so pivoting keeps the natural order
    const double bscale = 4.0 / (s.h * s.h);
    impl_->bscale = bscale;
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i) {
            int row = static_cast<int>(s.index(i, j));
            if (s.is_boundary(i, j)) {
                trip.emplace_back(row, row, -bscale);
                continue;
            }
            auto w = div_stencil(A, i, j);
            add_lower_order(w, P, variant, i, j, s.h);
            double rn = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    if (w[a][b] != 0.0) {
                        trip.emplace_back(row, static_cast<int>(s.index(i + a - 1, j + b - 1)), w[a][b]);
                        rn += std::abs(w[a][b]);
                    }
            row_norm = std::max(row_norm, rn);
        }
    impl_->row_norm = row_norm;
    impl_->M.resize(n, n);
    impl_->M.setFromTriplets(trip.begin(), trip.end());
    impl_->M.makeCompressed();
    impl_->lu.compute(impl_->M);
    if (impl_->lu.info() != Eigen::Success)
        throw SolverError("solve", "sparse factorization failed: " + impl_->lu.lastErrorMessage());
}

DirichletSolver::~DirichletSolver() = default;
DirichletSolver::DirichletSolver(DirichletSolver&&) noexcept = default;
DirichletSolver& DirichletSolver::operator=(DirichletSolver&&) noexcept = default;

ScalarField DirichletSolver::solve(const ScalarField& boundary, const ScalarField* source, SolveReport* report) const {
    const auto& s = impl_->spec;
    require_same_grid(s, boundary.spec(), "solve");
    if (source)
        require_same_grid(s, source->spec(), "solve");
    const int n = static_cast<int>(s.size());
    Eigen::VectorXd rhs(n);
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i) {
            auto k = s.index(i, j);
            rhs[static_cast<Eigen::Index>(k)] = s.is_boundary(i, j) ? -impl_->bscale * boundary[k] : (source ? (*source)[k] : 0.0);
        }
    Eigen::VectorXd x = impl_->lu.solve(rhs);
    if (impl_->lu.info() != Eigen::Success)
        throw SolverError("solve", "back substitution failed");
    auto rel_residual = [&](const Eigen::VectorXd& r) {
        double den = impl_->row_norm * x.lpNorm<Eigen::Infinity>() + rhs.lpNorm<Eigen::Infinity>();
        return r.lpNorm<Eigen::Infinity>() / std::max(den, 1e-300);
    };
    Eigen::VectorXd r = rhs - impl_->M * x;
    double res = rel_residual(r);
    for (int it = 0; it < 3 && res > tolerance; ++it) {
        x += impl_->lu.solve(r);
        r = rhs - impl_->M * x;
        res = rel_residual(r);
    }
    if (!x.allFinite())
        throw SolverError("solve", "solution is not finite");
    double cond = 0.0;
    if (res > tolerance || report) {
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
        Eigen::VectorXd y = impl_->lu.solve(ones);
        cond = impl_->row_norm * y.lpNorm<Eigen::Infinity>();
    }
    if (res > tolerance)
        throw SolverError("solve", "residual " + std::to_string(res) + " above tolerance; condition estimate " +
                                       std::to_string(cond));
    if (report)
        *report = {res, cond};
    return {s, std::vector<double>(x.data(), x.data() + n)};
}

ScalarField solve_dirichlet(const CoefficientField& A, const PotentialField& P, Variant variant,
                            const ScalarField& boundary, SolveReport* report) {
    return DirichletSolver(A, P, variant).solve(boundary, nullptr, report);
}

// ---------------------------------------------------------------------------
// Multiplier

double subsolution_rate(double lambda, double mu, Variant variant) {
    if (variant == Variant::electric)
        return (mu + std::sqrt(mu * mu + lambda)) / lambda;
    double b = 2 * mu + 1;
    return (b + std::sqrt(b * b + 4 * lambda)) / (2 * lambda);
}

MultiplierResult positive_multiplier(const CoefficientField& A, const PotentialField& P, Variant variant,
                                     std::optional<Region> check_region) {
    const auto& s = A.spec();
    MultiplierResult out;
    const double sqM = std::sqrt(P.M());
    if (P.V().max_abs() == 0.0) {
        out.phi = ScalarField(s, 1.0);
        out.min_phi = out.max_phi = 1.0;
        return out;
    }
    out.c1 = subsolution_rate(A.lambda(), A.mu(), variant);
    const double rate = out.c1 * sqM;
    auto boundary = ScalarField::from_function(s, [rate](double x, double) { return std::exp(rate * x); });
    Variant eq = variant == Variant::electric ? Variant::electric : Variant::nondiv_magnetic;
    out.phi = DirichletSolver(A, P, eq).solve(boundary, nullptr, &out.solve);
    out.min_phi = out.phi.min();
    out.max_phi = out.phi.max();
    if (!(out.min_phi > 0.0))
        throw HypothesisError("multiplier", "computed multiplier is not positive (min " + std::to_string(out.min_phi) +
                                                "); check the sign of V and ellipticity");
    const double xr = std::max(std::abs(s.origin.x), std::abs(s.origin.x + s.width()));
    const double slack = 1e-9;
    out.envelope_ok = out.min_phi >= std::exp(-rate * xr) * (1 - slack) && out.max_phi <= std::exp(rate * xr) * (1 + slack);
    double m = 0.0;
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i)
            if (!check_region || region_contains(*check_region, s.node(i, j)))
                m = std::max(m, std::abs(std::log(out.phi(i, j))));
    out.C1 = m / sqM;
    return out;
}

LogDerivativeReport log_derivative_report(const CoefficientField& A, const ScalarField& phi, const PotentialField& P,
                                          Variant variant, const Region& region) {
    require_same_grid(A.spec(), phi.spec(), "log_derivative");
    if (!(phi.min() > 0.0))
        throw HypothesisError("log_derivative", "multiplier must be positive");
    LogDerivativeReport r;
    r.psi = phi.map([](double v) { return std::log(v); });
    r.psi_x = partial_x(r.psi);
    r.psi_y = partial_y(r.psi);
    auto Lpsi = apply_L(A, r.psi);
    const auto& s = A.spec();
    bool any = false;
    for (int j = 1; j < s.ny; ++j)
        for (int i = 1; i < s.nx; ++i) {
            if (!region_contains(region, s.node(i, j)))
                continue;
            any = true;
            auto k = s.index(i, j);
            double gx = r.psi_x[k], gy = r.psi_y[k];
            r.sup_grad = std::max(r.sup_grad, std::hypot(gx, gy));
            Mat2 a = A.at(k);
            double quad = a.a11 * gx * gx + 2 * a.a12 * gx * gy + a.a22 * gy * gy;
            double res = Lpsi[k] + quad - P.V()[k];
            if (variant != Variant::electric && P.has_W())
                res -= P.W1()[k] * gx + P.W2()[k] * gy;
            r.residual = std::max(r.residual, std::abs(res));
        }
    if (!any)
        throw GeometryError("log_derivative", "region contains no interior node");
    return r;
}

InteriorGradientReport interior_gradient_report(const ScalarField& phi, const Region& inner, const Region& outer) {
    auto gx = partial_x(phi), gy = partial_y(phi);
    std::vector<double> g(phi.size());
    for (std::size_t k = 0; k < g.size(); ++k)
        g[k] = std::hypot(gx[k], gy[k]);
    InteriorGradientReport r;
    r.grad_sup = sup_norm(ScalarField(phi.spec(), std::move(g)), inner);
    r.value_sup = sup_norm(phi, outer);
    r.ratio = r.value_sup > 0 ? r.grad_sup / r.value_sup : 0.0;
    return r;
}

NormalizedProblem normalize_det(const CoefficientField& A, const PotentialField& P) {
    auto inv_sqrt = A.detA().map([](double d) { return 1.0 / std::sqrt(d); });
    auto sx = partial_x(inv_sqrt), sy = partial_y(inv_sqrt);
    const double lam2 = A.lambda() * A.lambda();
    NormalizedProblem out{CoefficientField(A.a11() * inv_sqrt, A.a12() * inv_sqrt, A.a22() * inv_sqrt, lam2),
                          A.a11() * sx + A.a12() * sy, A.a12() * sx + A.a22() * sy, P.V() * inv_sqrt};
    if (P.has_W()) {
        out.W1 = out.W1 + P.W1() * inv_sqrt;
        out.W2 = out.W2 + P.W2() * inv_sqrt;
    }
    return out;
}

} // namespace landis
