// Command-line driver: loads an experiment config, runs one pipeline, and writes
// CSV tables, two-column .dat files, run.json (deterministic) and timing.json.
#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <thread>

#include "CLI11.hpp"
#include "config.hpp"
#include "landis/hash.hpp"
#include "landis/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace landis;
using landis::cli::ExperimentConfig;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

using Row = std::vector<std::string>;

class Run {
public:
    Run(ExperimentConfig cfg, fs::path out, int jobs, std::string command)
        : cfg(std::move(cfg)), out(std::move(out)), jobs(std::max(1, jobs)), command(std::move(command)),
          cache((this->out / "cache").string()) {}

    ExperimentConfig cfg;
    fs::path out;
    int jobs;
    std::string command;
    AtlasCache cache;
    json stages = json::object();

    void stage_value(const std::string& key, const json& v) {
        std::lock_guard lock(mu_);
        stages[key] = v;
    }

    template <class F>
    auto timed(const std::string& name, F&& f) {
        auto t0 = std::chrono::steady_clock::now();
        struct Rec {
            Run* r;
            std::string name;
            std::chrono::steady_clock::time_point t0;
            ~Rec() {
                double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                std::lock_guard lock(r->mu_);
                r->timing_[name] += s;
            }
        } rec{this, name, t0};
        return f();
    }

    void csv(const std::string& name, const Row& header, const std::vector<Row>& rows) {
        std::string text = join(header) + "\n";
        for (const auto& r : rows)
            text += join(r) + "\n";
        write(name, text);
    }

    void dat(const std::string& name, const std::string& comment, const std::vector<std::pair<double, double>>& xy) {
        std::string text = "# " + comment + "\n";
        for (auto [x, y] : xy)
            text += num(x) + " " + num(y) + "\n";
        write(name, text);
    }

    void field_csv(const std::string& name, const ScalarField& f) {
        const auto& s = f.spec();
        std::string text = "x,y,value\n";
        for (int j = 0; j <= s.ny; ++j)
            for (int i = 0; i <= s.nx; ++i)
                text += num(s.x(i)) + "," + num(s.y(j)) + "," + num(f(i, j)) + "\n";
        write(name, text);
    }

    void polyline(const std::string& stem, const Polyline& p) {
        std::string c = "x,y\n", d = "# x y\n";
        for (const auto& v : p.vertices) {
            c += num(v.x) + "," + num(v.y) + "\n";
            d += num(v.x) + " " + num(v.y) + "\n";
        }
        if (!p.vertices.empty()) {
            d += num(p.vertices.front().x) + " " + num(p.vertices.front().y) + "\n";
        }
        write(stem + ".csv", c);
        write(stem + ".dat", d);
    }

    void cache_event(bool hit) { (hit ? hits_ : misses_)++; }

    void finish(const std::string& status, const json& failure = nullptr) {
        if (!failure.is_null())
            write("failure.json", failure.dump(2) + "\n");
        json rec;
        rec["command"] = command;
        rec["status"] = status;
        rec["config_hash"] = cfg.hash();
        rec["config"] = cfg.to_json();
        rec["versions"] = {{"landis", kVersion},
                           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION)},
                           {"fft", fft_backend_version()}};
        rec["stages"] = stages;
        json arts = json::array();
        for (const auto& [path, h] : artifacts_)
            arts.push_back({{"path", path}, {"fnv1a", h}});
        rec["artifacts"] = arts;
        rec["cache"] = {{"hits", hits_.load()}, {"misses", misses_.load()}};
        std::ofstream(out / "run.json") << rec.dump(2) << "\n";

        json t;
        double total = 0.0;
        for (const auto& [k, v] : timing_) {
            t["stages"][k] = v;
            total += v;
        }
        t["total"] = total;
        std::ofstream(out / "timing.json") << t.dump(2) << "\n";
    }

private:
    static std::string join(const Row& r) {
        std::string s;
        for (std::size_t k = 0; k < r.size(); ++k)
            s += (k ? "," : "") + r[k];
        return s;
    }

    void write(const std::string& name, const std::string& text) {
        std::lock_guard lock(mu_);
        std::ofstream(out / name, std::ios::binary) << text;
        artifacts_[name] = hex64(fnv1a(text));
    }

    std::mutex mu_;
    std::map<std::string, std::string> artifacts_;
    std::map<std::string, double> timing_;
    std::atomic<int> hits_{0}, misses_{0};
};

// Runs body(k) for k < n on `jobs` threads; callers store results by index.
template <class F>
void parallel_cells(int n, int jobs, F&& body) {
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex m;
    auto worker = [&] {
        for (int k; (k = next++) < n;) {
            try {
                body(k);
            } catch (...) {
                std::lock_guard lock(m);
                if (!err)
                    err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < std::min(jobs, n); ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    if (err)
        std::rethrow_exception(err);
}

// ---------------------------------------------------------------------------
// problem assembly

CoefficientFamily family(const ExperimentConfig& c) {
    if (c.family == "identity")
        return CoefficientFamily::identity();
    if (c.family == "constant")
        return CoefficientFamily::constant(c.matrix, c.lambda);
    return CoefficientFamily::trig(c.lambda, c.mu, c.coef_seed, c.det_one);
}

PotentialField potential(const ExperimentConfig& c, const GridSpec& s, double M) {
    return PotentialField::sample(PotentialFamily::random(M, c.potential_seed, c.with_W, c.potential_freq), s);
}

ScalarField boundary(const ExperimentConfig& c, const GridSpec& s) {
    SmoothRandom r(c.boundary_seed, c.boundary_freq);
    return ScalarField::from_function(
        s, [&](double x, double y) { return c.boundary_offset + c.boundary_amplitude * r(x, y); });
}

std::string field_key(const CoefficientField& A, const std::vector<double>& radii, double domain) {
    std::uint64_t h = fnv1a("atlas");
    for (const ScalarField* f : {&A.a11(), &A.a12(), &A.a22()}) {
        auto v = f->values();
        h = fnv1a({reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double)}, h);
    }
    const auto& s = A.spec();
    std::vector<double> meta = {s.origin.x, s.origin.y, s.h, double(s.nx), double(s.ny), domain};
    meta.insert(meta.end(), radii.begin(), radii.end());
    h = fnv1a({reinterpret_cast<const char*>(meta.data()), meta.size() * sizeof(double)}, h);
    return hex64(h);
}

std::shared_ptr<const QuasiBallAtlas> atlas(Run& run, const CoefficientField& A, const std::vector<double>& radii,
                                            double domain) {
    bool hit = false;
    auto a = run.timed("fundsol", [&] {
        return run.cache.get_or_build(field_key(A, radii, domain), radii,
                                      [&] { return fundamental_solution(A, {0, 0}, domain); }, &hit);
    });
    run.cache_event(hit);
    return a;
}

std::pair<double, double> geometry(Run& run) {
    const auto& c = run.cfg;
    if (c.b && c.d)
        return {*c.b, *c.d};
    auto gs = GridSpec::centered(3.5, c.n);
    std::vector<const QuasiBallAtlas*> atlases;
    std::vector<std::shared_ptr<const QuasiBallAtlas>> keep;
    std::vector<CoefficientField> samples;
    if (c.family == "trig") {
        for (std::uint64_t k = 0; k < 4; ++k)
            samples.push_back(CoefficientField::sample(CoefficientFamily::trig(c.lambda, c.mu, c.coef_seed + k), gs));
        const double e = 0.95 * std::log(1.0 / c.lambda);
        samples.push_back(CoefficientField::sample(
            CoefficientFamily::constant({std::exp(e), 0.0, std::exp(-e)}, c.lambda), gs));
    } else {
        samples.push_back(CoefficientField::sample(family(c), gs));
    }
    std::vector<double> radii = {0.5, 1.0, 1.2, 1.4};
    for (const auto& A : samples) {
        keep.push_back(atlas(run, A, radii, 3.3));
        atlases.push_back(keep.back().get());
    }
    auto g = geometry_constants(c.lambda, atlases);
    run.stage_value("geometry.b", g.b);
    run.stage_value("geometry.d", g.d);
    run.stage_value("geometry.samples", g.samples);
    return {c.b.value_or(g.b), c.d.value_or(g.d)};
}

// ---------------------------------------------------------------------------
// subcommands

void check_coefficients(Run& run) {
    const auto& c = run.cfg;
    auto s = GridSpec::centered(c.half_width, c.n);
    auto A = run.timed("coefficients", [&] { return CoefficientField::sample(family(c), s); });
    auto B = eta_nu_from_A(A);
    double dmin = A.detA().min(), dmax = A.detA().max();
    const double bound = (1 - c.lambda) / (1 + c.lambda);
    std::vector<Row> rows = {{"realized_lambda", num(A.realized_lambda())},
                             {"lambda", num(c.lambda)},
                             {"max_gradient", num(A.max_gradient())},
                             {"mu", num(A.mu())},
                             {"max_eta_plus_nu", num(B.max_sum())},
                             {"eta_nu_bound", num(bound)},
                             {"det_min", num(dmin)},
                             {"det_max", num(dmax)}};
    run.csv("coefficients_summary.csv", {"quantity", "value"}, rows);
    std::vector<Row> field;
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i) {
            auto m = A.at(i, j);
            field.push_back({num(s.x(i)), num(s.y(j)), num(m.a11), num(m.a12), num(m.a22)});
        }
    run.csv("coefficients.csv", {"x", "y", "a11", "a12", "a22"}, field);
    run.stage_value("coefficients.max_eta_plus_nu", B.max_sum());
    if (B.max_sum() > bound + 1e-12)
        throw HypothesisError("coefficients", "|eta| + |nu| exceeds (1 - lambda)/(1 + lambda)");
}

void solve(Run& run) {
    const auto& c = run.cfg;
    auto s = GridSpec::centered(c.half_width, c.n);
    auto A = CoefficientField::sample(family(c), s);
    auto P = potential(c, s, c.M_list.front());
    SolveReport rep;
    auto u = run.timed("solve", [&] { return solve_dirichlet(A, P, c.variant, boundary(c, s), &rep); });
    run.field_csv("u.csv", u);
    run.csv("solve_summary.csv", {"variant", "lambda", "mu", "M", "residual", "sup"},
            {{to_string(c.variant), num(c.lambda), num(c.mu), num(P.M()), num(rep.residual), num(u.max_abs())}});
    run.stage_value("solve.residual", rep.residual);
}

void multiplier(Run& run) {
    const auto& c = run.cfg;
    auto s = GridSpec::centered(c.half_width, c.n);
    auto A = CoefficientField::sample(family(c), s);
    const double inner = c.half_width > 0.8 ? c.half_width - 0.4 : 0.5 * c.half_width;
    const int n = static_cast<int>(c.M_list.size());
    std::vector<MultiplierResult> res(n);
    std::vector<double> grad(n);
    parallel_cells(n, run.jobs, [&](int k) {
        auto P = potential(c, s, c.M_list[k]);
        res[k] = run.timed("multiplier", [&] {
            return positive_multiplier(A, P, c.variant, Region(Ball{{0, 0}, c.half_width}));
        });
        grad[k] = log_derivative_report(A, res[k].phi, P, c.variant, Ball{{0, 0}, inner}).sup_grad;
    });
    std::vector<Row> rows;
    std::vector<double> env;
    std::vector<std::pair<double, double>> de, dg;
    for (int k = 0; k < n; ++k) {
        double M = c.M_list[k];
        env.push_back(res[k].C1 * std::sqrt(M));
        rows.push_back({to_string(c.variant), num(c.lambda), num(c.mu), num(M), num(env.back()), num(grad[k]),
                        num(res[k].min_phi), num(res[k].max_phi), res[k].envelope_ok ? "1" : "0",
                        num(res[k].solve.residual)});
        de.emplace_back(M, env.back());
        dg.emplace_back(M, grad[k]);
        run.stage_value("multiplier.M" + tag(M) + ".residual", res[k].solve.residual);
    }
    run.csv("multiplier.csv",
            {"variant", "lambda", "mu", "M", "log_envelope", "sup_grad_psi", "min_phi", "max_phi", "envelope_ok",
             "residual"},
            rows);
    run.dat("multiplier_envelope.dat", "M max|log phi|", de);
    run.dat("multiplier_grad.dat", "M sup|grad psi| on B_" + tag(inner), dg);
    if (n >= 2) {
        run.csv("multiplier_fit.csv", {"quantity", "fitted_exponent"},
                {{"log_envelope", num(loglog_slope(c.M_list, env))}, {"sup_grad_psi", num(loglog_slope(c.M_list, grad))}});
    } else {
        run.field_csv("phi.csv", res[0].phi);
    }
}

void fundsol(Run& run) {
    const auto& c = run.cfg;
    auto s = GridSpec::centered(c.half_width, c.n);
    auto A = CoefficientField::sample(family(c), s);
    auto at = atlas(run, A, c.radii, c.pole_domain * c.half_width);
    const auto& F = at->source();
    auto sw = sandwich_report(A, F);
    run.field_csv("fundsol.csv", F.G);
    run.csv("fundsol_summary.csv", {"quantity", "value"},
            {{"C1", num(sw.C1)},
             {"C2", num(sw.C2)},
             {"C3", num(sw.C3)},
             {"C4", num(sw.C4)},
             {"near_fit_slope", num(sw.near_fit_slope)},
             {"near_fit_r2", num(sw.near_fit_r2)},
             {"mid_annulus_ok", sw.mid_annulus_ok ? "1" : "0"},
             {"residual_off_pole", num(sw.residual_off_pole)},
             {"closed_form", F.exact ? "1" : "0"}});
    run.stage_value("fundsol.residual_off_pole", sw.residual_off_pole);
}

void quasiball(Run& run) {
    const auto& c = run.cfg;
    auto s = GridSpec::centered(c.half_width, c.n);
    auto A = CoefficientField::sample(family(c), s);
    auto at = atlas(run, A, c.radii, c.pole_domain * c.half_width);
    std::vector<Row> rows;
    for (const auto& [sv, poly] : at->circles()) {
        rows.push_back({num(sv), num(at->sigma_hat(sv)), num(at->rho_hat(sv)), std::to_string(poly.size())});
        run.polyline("quasi_circle_s" + tag(sv), poly);
    }
    run.csv("quasiballs.csv", {"s", "sigma_hat", "rho_hat", "vertices"}, rows);
    run.stage_value("quasiball.nested", at->nested());
    if (!at->nested())
        throw GeometryError("quasiball", "quasi-circles are not nested");
}

void beltrami_check(Run& run) {
    const auto& c = run.cfg;
    std::vector<Row> rows;
    std::mt19937_64 rng(c.seed);
    for (double lam : c.lambdas) {
        std::uniform_real_distribution<double> U(std::log(lam), -std::log(lam)), T(0, M_PI);
        double worst = 0.0, eig = 0.0;
        const double bound = (1 - lam) / (1 + lam);
        for (int k = 0; k < c.samples; ++k) {
            double l1 = std::exp(U(rng)), l2 = std::exp(U(rng)), t = T(rng);
            double cs = std::cos(t), sn = std::sin(t);
            auto [eta, nu] = eta_nu({l1 * cs * cs + l2 * sn * sn, (l1 - l2) * cs * sn, l1 * sn * sn + l2 * cs * cs});
            worst = std::max(worst, std::abs(eta) + std::abs(nu));
            double r = bound * std::uniform_real_distribution<double>(0, 1)(rng), th = 2 * T(rng);
            Mat2 m = hat_matrix(r * std::cos(th), r * std::sin(th));
            eig = std::max({eig, std::abs(m.min_eig() - (1 - r) / (1 + r)), std::abs(m.max_eig() - (1 + r) / (1 - r))});
        }
        rows.push_back({num(lam), std::to_string(c.samples), num(worst), num(bound), num(eig),
                        worst <= bound + 1e-12 ? "1" : "0"});
        run.stage_value("beltrami.lambda" + tag(lam) + ".max_sum", worst);
    }
    run.csv("beltrami.csv", {"lambda", "samples", "max_eta_plus_nu", "bound", "hat_eigen_error", "pass"}, rows);

    auto s = GridSpec::centered(c.half_width, c.n);
    auto A = CoefficientField::sample(family(c), s);
    auto f = ComplexField::from_function(s, [](Complex z) { return std::sin(z) + 0.3 * std::conj(z) * z; });
    auto d0 = apply_D(A, f, DForm::definition), d1 = apply_D(A, f, DForm::expanded);
    double gap = (d0 - d1).max_abs() / std::max(1.0, d0.max_abs());
    run.csv("beltrami_forms.csv", {"quantity", "value"}, {{"definition_vs_expanded", num(gap)}});
    run.stage_value("beltrami.form_gap", gap);
}

void transforms_check(Run& run) {
    const auto& c = run.cfg;
    auto s = GridSpec::centered(1.1, c.n);
    DomainMask mask(s, Ball{{0, 0}, 1.0});
    auto g = ComplexField::from_function(s, [](Complex z) { return std::exp(z) * std::cos(2 * z.real()) + z * z; });
    auto [Tg, Sg, T1] = run.timed("transforms", [&] {
        return std::tuple{cauchy_T(g, mask), beurling_S(g, mask), cauchy_T(ComplexField(s, Complex(1.0)), mask)};
    });
    auto W = wirtinger(Tg);
    double e1 = 0, e2 = 0, e3 = 0;
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i) {
            auto k = s.index(i, j);
            if (mask.interior(i, j, 3)) {
                e1 = std::max(e1, std::abs(W.dbar[k] - g[k]));
                e2 = std::max(e2, std::abs(W.d[k] - Sg[k]));
            }
            if (s.node(i, j).norm() <= 0.9)
                e3 = std::max(e3, std::abs(T1[k] - std::conj(s.node(i, j).z())));
        }
    auto probe = run.timed("norm_probe", [&] { return operator_norm_probe(mask, 2.1, 8, c.seed); });
    run.csv("transforms.csv", {"quantity", "value"},
            {{"dbar_T_minus_identity", num(e1)},
             {"d_T_minus_S", num(e2)},
             {"T1_minus_conj_z", num(e3)},
             {"S_norm_probe_p2.1", num(probe.estimate)}});
    std::vector<std::pair<double, double>> running;
    for (std::size_t k = 0; k < probe.running.size(); ++k)
        running.emplace_back(double(k + 1), probe.running[k]);
    run.dat("norm_probe.dat", "trial running_max", running);
    run.stage_value("transforms.probe", probe.estimate);
}

void factorize_cmd(Run& run) {
    const auto& c = run.cfg;
    auto s = GridSpec::centered(1.1, c.n);
    const std::string key = hex64(fnv1a("factorize:" + std::to_string(c.n)));
    fs::path cached = run.out / "cache" / ("factorization_" + key + ".json");
    json summary;
    if (fs::exists(cached)) {
        std::ifstream(cached) >> summary;
        run.cache_event(true);
    } else {
        run.cache_event(false);
        auto q1f = [](Complex z) { return Complex(0.2, 0.1 * z.real()); };
        auto q2f = [](Complex z) { return Complex(0.1 * z.imag(), 0.0); };
        auto Bf = [](Complex z) { return Complex(0.5, 0.2 * z.imag()); };
        auto wf = [](Complex z) { return 2.0 + z + 0.3 * std::conj(z) * std::conj(z); };
        auto Af = [&](Complex z) {
            Complex w = wf(z);
            return (0.6 * std::conj(z) + q1f(z) + q2f(z) - Bf(z) * std::conj(w)) / w;
        };
        DomainMask mask(s, Ball{{0, 0}, 1.0});
        GeneralizedBeltramiEq eq{ComplexField::from_function(s, q1f), ComplexField::from_function(s, q2f),
                                 ComplexField::from_function(s, Af), ComplexField::from_function(s, Bf), 0.45};
        IntegralOptions opt;
        opt.probe_seed = c.seed;
        auto fac = run.timed("factorize", [&] { return factorize(ComplexField::from_function(s, wf), eq, mask, opt); });
        summary = {{"reconstruction", fac.reconstruction}, {"residual_f", fac.residual_f},
                   {"residual_f_rms", fac.residual_f_rms}, {"g_min", fac.g_min},
                   {"g_max", fac.g_max},                   {"C_hat", fac.C_hat},
                   {"coef_norm", fac.coef_norm},           {"iterations", fac.solve.iterations},
                   {"Cp", fac.solve.Cp},                   {"contraction_bound", fac.solve.contraction_bound},
                   {"observed_ratio", fac.solve.observed_ratio}};
        fs::create_directories(cached.parent_path());
        std::ofstream(cached) << summary.dump(2) << "\n";
    }
    std::vector<Row> rows;
    for (auto it = summary.begin(); it != summary.end(); ++it) {
        rows.push_back({it.key(), num(it.value().get<double>())});
        run.stage_value("factorize." + it.key(), it.value());
    }
    run.csv("factorization.csv", {"quantity", "value"}, rows);
}

void three_circle(Run& run) {
    const auto& c = run.cfg;
    auto s = GridSpec::centered(c.half_width, c.n);
    const double k = c.hat_r / std::sqrt(2.0);
    SmoothRandom sa(c.hat_seed, c.hat_freq), sb(c.hat_seed + 1, c.hat_freq);
    HatOperator H{ScalarField::from_function(s, [&](double x, double y) { return k * sa(x, y); }),
                  ScalarField::from_function(s, [&](double x, double y) { return k * sb(x, y); }), 1.0};
    ComplexField f;
    if (c.f_kind == "power") {
        if (c.hat_r != 0.0)
            throw ConfigError("three-circle", "f = z^n is holomorphic only for the flat hat operator (hat_r = 0)");
        f = ComplexField::from_function(s, [&](Complex z) { return std::pow(z, c.power); });
    } else {
        f = run.timed("hat_sample", [&] { return hat_holomorphic_sample(H, boundary(c, s)).f; });
    }
    auto at = atlas(run, hatA_from_hat(H), c.s, c.pole_domain * c.half_width);
    auto t = three_quasi_circle(f, *at, c.s[0], c.s[1], c.s[2]);
    bool ok = t.rel_defect <= c.three_circle_tol;
    run.csv("three_circle.csv", {"s1", "s2", "s3", "M1", "M2", "M3", "lhs", "rhs", "theta", "rel_defect", "pass"},
            {{num(t.s1), num(t.s2), num(t.s3), num(t.M1), num(t.M2), num(t.M3), num(t.lhs), num(t.rhs), num(t.theta),
              num(t.rel_defect), ok ? "1" : "0"}});
    run.dat("three_circle.dat", "s max|f| on Z_s", {{t.s1, t.M1}, {t.s2, t.M2}, {t.s3, t.M3}});
    run.stage_value("three_circle.rel_defect", t.rel_defect);
}

void vanish_order(Run& run) {
    const auto& c = run.cfg;
    auto [b, d] = geometry(run);
    auto s = GridSpec::centered(d, c.n);
    auto A = CoefficientField::sample(family(c), s);
    auto at = atlas(run, A, {0.5, 1.0, 1.2, 1.4}, 0.9 * d);
    const int n = static_cast<int>(c.M_list.size());
    std::vector<VanishingOrderReport> reps(n);
    VanishingOptions opt;
    opt.fit_radii = c.fit_radii;
    opt.report_radii = c.report_radii;
    opt.stream_tol = c.stream_tol;
    opt.integral.probe_seed = c.seed;
    parallel_cells(n, run.jobs, [&](int k) {
        const double M = c.M_list[k];
        auto P = potential(c, s, M);
        auto u = run.timed("extremal_solution", [&] { return extremal_solution(A, P, c.variant, b, d, c.C0); });
        LandisProblem pr{A, P, c.variant, u, at, b, d, c.C0};
        pr.validate(c.residual_tol);
        reps[k] = run.timed("vanishing_experiment", [&] { return vanishing_order_experiment(pr, opt); });
    });
    std::vector<Row> rows, stages;
    std::vector<double> kappa;
    std::vector<std::pair<double, double>> kd;
    for (int k = 0; k < n; ++k) {
        const auto& r = reps[k];
        const double M = c.M_list[k];
        for (std::size_t q = 0; q < r.radii.size(); ++q)
            rows.push_back({to_string(c.variant), num(c.lambda), num(c.mu), num(M), num(r.radii[q]), num(r.sup_ball[q]),
                            num(r.kappa_hat)});
        for (const auto& [key, v] : r.stages) {
            stages.push_back({num(M), key, num(v)});
            run.stage_value("vanish.M" + tag(M) + "." + key, v);
        }
        stages.push_back({num(M), "three_circle.rel_defect", num(r.three_circle.rel_defect)});
        run.stage_value("vanish.M" + tag(M) + ".route", r.route);
        kappa.push_back(r.kappa_hat);
        kd.emplace_back(M, r.kappa_hat);
    }
    run.csv("vanish_order.csv", {"variant", "lambda", "mu", "M", "r", "sup", "fitted_exponent"}, rows);
    run.csv("vanish_stages.csv", {"M", "stage", "value"}, stages);
    run.dat("kappa.dat", "M kappa_hat", kd);
    if (n >= 2) {
        bool positive = std::all_of(kappa.begin(), kappa.end(), [](double v) { return v > 0; });
        double e = positive ? loglog_slope(c.M_list, kappa) : std::nan("");
        run.csv("vanish_fit.csv", {"quantity", "fitted_exponent"}, {{"kappa_vs_M", num(e)}});
        run.stage_value("vanish.sqrt_law_exponent", e);
    }
}

void landis_scan_cmd(Run& run) {
    const auto& c = run.cfg;
    auto s = GridSpec::centered(c.half_width, c.n);
    auto A = CoefficientField::sample(family(c), s);
    auto P = potential(c, s, c.M_list.front());
    auto u = run.timed("solve", [&] { return solve_dirichlet(A, P, c.variant, boundary(c, s)); });
    if (u.min() <= 0)
        throw HypothesisError("landis-scan", "manufactured solution is not positive; raise boundary.offset");
    auto scan = run.timed("scan", [&] { return landis_scan(u, c.R_list, c.angles); });
    std::vector<Row> rows;
    std::vector<std::pair<double, double>> xy;
    for (const auto& r : scan.rows) {
        rows.push_back({to_string(c.variant), num(c.lambda), num(c.mu), num(P.M()), num(r.R), num(r.inf_sup),
                        num(r.C_hat)});
        xy.emplace_back(r.R, r.inf_sup);
    }
    run.csv("landis_scan.csv", {"variant", "lambda", "mu", "M", "R", "inf", "C_hat"}, rows);
    run.dat("landis_scan.dat", "R inf_{|z0|=R} sup_{B_1(z0)}|u|", xy);
    run.stage_value("scan.C_envelope", scan.C_envelope);
}

int exit_code(const std::exception& e) {
    if (dynamic_cast<const HypothesisError*>(&e))
        return 2;
    if (dynamic_cast<const ConfigError*>(&e))
        return 3;
    if (dynamic_cast<const Error*>(&e))
        return 4;
    return 5;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for quantitative unique continuation in the plane"};
    app.require_subcommand(1);
    std::string config_path, out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> grid;
    int jobs = 1;
    app.add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "master seed, overrides the config");
    app.add_option("--grid", grid, "cells per side, overrides grid.n");
    app.add_option("--jobs", jobs, "concurrent cells")->check(CLI::PositiveNumber);
    app.set_version_flag("--version", kVersion);

    const std::vector<std::pair<std::string, void (*)(Run&)>> commands = {
        {"check-coefficients", check_coefficients},
        {"solve", solve},
        {"multiplier", multiplier},
        {"fundsol", fundsol},
        {"quasiball", quasiball},
        {"beltrami-check", beltrami_check},
        {"transforms-check", transforms_check},
        {"factorize", factorize_cmd},
        {"three-circle", three_circle},
        {"vanish-order", vanish_order},
        {"landis-scan", landis_scan_cmd},
    };
    for (const auto& [name, fn] : commands)
        app.add_subcommand(name)->fallthrough();
    CLI11_PARSE(app, argc, argv);

    std::string command;
    void (*fn)(Run&) = nullptr;
    for (const auto& [name, f] : commands)
        if (app.got_subcommand(name))
            command = name, fn = f;

    ExperimentConfig cfg;
    try {
        cfg = config_path.empty() ? landis::cli::load_config("", seed, grid)
                                  : landis::cli::load_config_file(config_path, seed, grid);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return exit_code(e);
    }
    fs::create_directories(out_dir);
    Run run(cfg, out_dir, jobs, command);
    try {
        fn(run);
    } catch (const std::exception& e) {
        json failure = {{"command", command}, {"message", e.what()}};
        if (auto* le = dynamic_cast<const Error*>(&e))
            failure["stage"] = le->stage();
        failure["kind"] = dynamic_cast<const HypothesisError*>(&e) ? "hypothesis"
                          : dynamic_cast<const ConfigError*>(&e)   ? "config"
                          : dynamic_cast<const SolverError*>(&e)   ? "solver"
                          : dynamic_cast<const GeometryError*>(&e) ? "geometry"
                          : dynamic_cast<const GridMismatch*>(&e)  ? "grid"
                                                                   : "internal";
        run.finish("failed", failure);
        std::cerr << command << " failed: " << e.what() << "\n";
        return exit_code(e);
    }
    run.finish("ok");
    std::cout << command << ": wrote " << (fs::path(out_dir) / "run.json").string() << "\n";
    return 0;
}
