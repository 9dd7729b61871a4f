#include "landis/quasigeom.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include <json.hpp>

namespace landis {

namespace {

bool is_constant(const CoefficientField& A, Mat2& out) {
    out = A.at(0);
    for (std::size_t k = 1; k < A.a11().size(); ++k) {
        Mat2 m = A.at(k);
        if (std::abs(m.a11 - out.a11) > 1e-14 || std::abs(m.a12 - out.a12) > 1e-14 || std::abs(m.a22 - out.a22) > 1e-14)
            return false;
    }
    return true;
}

std::function<double(Point)> closed_form(const Mat2& A, Point pole) {
    return [A, pole](Point p) { return constant_fundamental_solution(A, {p.x - pole.x, p.y - pole.y}); };
}

} // namespace

double constant_fundamental_solution(const Mat2& A, Point z) {
    const double det = A.det();
    // zᵀ A⁻¹ z
    double q = (A.a22 * z.x * z.x - 2 * A.a12 * z.x * z.y + A.a11 * z.y * z.y) / det;
    double cap = 0.5 * (1.0 / std::sqrt(A.min_eig()) + 1.0 / std::sqrt(A.max_eig()));
    return (0.5 * std::log(q) - std::log(cap)) / std::sqrt(det);
}

double FundamentalSolution::value(Point p) const {
    if (exact)
        return exact(p);
    return G.sample_cubic(p);
}

FundamentalSolution fundamental_solution(const CoefficientField& A, Point pole, double domain_radius,
                                         const FundamentalSolutionOptions& opt) {
    const auto& s = A.spec();
    const double margin = 2.0 * s.h;
    if (pole.x < s.origin.x + margin || pole.x > s.origin.x + s.width() - margin || pole.y < s.origin.y + margin ||
        pole.y > s.origin.y + s.height() - margin)
        throw GeometryError("fundsol", "pole must lie strictly inside the grid");
    if (!s.contains({pole.x - domain_radius, pole.y - domain_radius}) ||
        !s.contains({pole.x + domain_radius, pole.y + domain_radius}))
        throw GeometryError("fundsol", "grid does not cover the requested domain radius");

    FundamentalSolution F;
    F.pole = pole;
    F.domain_radius = domain_radius;
    Mat2 c;
    if (!opt.force_numeric && is_constant(A, c)) {
        F.exact = closed_form(c, pole);
        F.frozen = c;
        const double rmin = 0.25 * s.h;
        F.G = ScalarField::from_function(s, [&](double x, double y) {
            double dx = x - pole.x, dy = y - pole.y;
            double r = std::hypot(dx, dy);
            if (r < rmin)
                return F.exact({pole.x + rmin, pole.y});
            return F.exact({x, y});
        });
        return F;
    }

    // far-field data from the closed form of the boundary-averaged matrix
    Mat2 bar{0, 0, 0};
    int nb = 0;
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i)
            if (s.is_boundary(i, j)) {
                Mat2 m = A.at(i, j);
                bar.a11 += m.a11;
                bar.a12 += m.a12;
                bar.a22 += m.a22;
                ++nb;
            }
    bar.a11 /= nb;
    bar.a12 /= nb;
    bar.a22 /= nb;
    F.frozen = bar;
    auto far = closed_form(bar, pole);
    auto boundary = ScalarField::from_function(s, [&](double x, double y) {
        if (std::hypot(x - pole.x, y - pole.y) < s.h)
            return 0.0;
        return far({x, y});
    });

    // discrete delta of total mass 2π, split bilinearly between the four nodes
    // of the cell holding the pole
    std::vector<double> src(s.size(), 0.0);
    double fx = (pole.x - s.origin.x) / s.h, fy = (pole.y - s.origin.y) / s.h;
    int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
    double tx = fx - i0, ty = fy - j0;
    const double mass = 2.0 * std::numbers::pi / (s.h * s.h);
    src[s.index(i0, j0)] += mass * (1 - tx) * (1 - ty);
    src[s.index(i0 + 1, j0)] += mass * tx * (1 - ty);
    src[s.index(i0, j0 + 1)] += mass * (1 - tx) * ty;
    src[s.index(i0 + 1, j0 + 1)] += mass * tx * ty;
    ScalarField source(s, std::move(src));
    F.G = DirichletSolver(A, PotentialField::zero(s), Variant::electric).solve(boundary, &source);
    return F;
}

SandwichReport sandwich_report(const CoefficientField& A, const FundamentalSolution& F,
                               const FundamentalSolutionOptions& opt) {
    SandwichReport r;
    const auto& s = F.G.spec();
    const double excl = opt.pole_exclusion * s.h;
    double c1 = 1e300, c2 = -1e300, c3 = 1e300, c4 = -1e300;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int n = 0;
    auto LG = apply_L(A, F.G);
    for (int j = 1; j < s.ny; ++j)
        for (int i = 1; i < s.nx; ++i) {
            Point p = s.node(i, j);
            double rad = std::hypot(p.x - F.pole.x, p.y - F.pole.y);
            if (rad <= excl)
                continue;
            double g = F.G(i, j);
            r.residual_off_pole = std::max(r.residual_off_pole, std::abs(LG(i, j)));
            if (rad <= r.R1) {
                double ratio = -g / std::log(1.0 / rad);
                c1 = std::min(c1, ratio);
                c2 = std::max(c2, ratio);
                double lx = std::log(rad);
                sx += lx;
                sy += g;
                sxx += lx * lx;
                sxy += lx * g;
                syy += g * g;
                ++n;
            } else if (rad >= r.R2) {
                double ratio = g / std::log(rad);
                c3 = std::min(c3, ratio);
                c4 = std::max(c4, ratio);
                r.far_available = true;
            }
        }
    if (n < 3)
        throw GeometryError("fundsol", "too few nodes near the pole for the sandwich fit");
    r.C1 = c1;
    r.C2 = c2;
    r.C3 = r.far_available ? c3 : 0.0;
    r.C4 = r.far_available ? c4 : 0.0;
    double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
    r.near_fit_slope = cxy / vx;
    r.near_fit_r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
    // discrete maximum principle: the annulus is controlled by stencil neighbours
    // up to one diagonal step beyond each circle
    const double lo = r.C2 * std::log(r.R1 - std::sqrt(2.0) * s.h);
    const double hi = r.C4 * std::log(r.R2 + std::sqrt(2.0) * s.h);
    r.mid_annulus_ok = true;
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i) {
            Point p = s.node(i, j);
            double rad = std::hypot(p.x - F.pole.x, p.y - F.pole.y);
            if (rad <= r.R1 || rad >= r.R2)
                continue;
            double g = F.G(i, j);
            if (g < lo - 1e-9)
                r.mid_annulus_ok = false;
            if (r.far_available && g > hi + 1e-9)
                r.mid_annulus_ok = false;
        }
    return r;
}

// ---------------------------------------------------------------------------
// Level sets

namespace {

struct EdgeGraph {
    std::unordered_map<std::uint64_t, std::array<std::int64_t, 2>> adj;

    void link(std::uint64_t a, std::uint64_t b) {
        add(a, static_cast<std::int64_t>(b));
        add(b, static_cast<std::int64_t>(a));
    }
    void add(std::uint64_t a, std::int64_t b) {
        auto [it, fresh] = adj.try_emplace(a, std::array<std::int64_t, 2>{-1, -1});
        if (it->second[0] < 0)
            it->second[0] = b;
        else
            it->second[1] = b;
    }
};

// root of p(t) = 0 on [0, 1] by bisection; p(0), p(1) of opposite sign
template <class P>
double bisect(P p, double t0 = 0.0, double t1 = 1.0) {
    double f0 = p(t0);
    for (int it = 0; it < 60; ++it) {
        double tm = 0.5 * (t0 + t1);
        double fm = p(tm);
        if ((fm < 0) == (f0 < 0)) {
            t0 = tm;
            f0 = fm;
        } else {
            t1 = tm;
        }
    }
    return 0.5 * (t0 + t1);
}

Point edge_vertex(const FundamentalSolution& F, double c, std::uint64_t id) {
    const auto& s = F.G.spec();
    std::size_t node = id / 2;
    int i = static_cast<int>(node % s.nodes_x()), j = static_cast<int>(node / s.nodes_x());
    bool horizontal = (id % 2) == 0;
    int di = horizontal ? 1 : 0, dj = horizontal ? 0 : 1;
    Point p0 = s.node(i, j), p1 = s.node(i + di, j + dj);
    double g0 = F.G(i, j) - c, g1 = F.G(i + di, j + dj) - c;
    double t = g0 / (g0 - g1);
    auto lerp = [&](double tt) { return Point{p0.x + tt * (p1.x - p0.x), p0.y + tt * (p1.y - p0.y)}; };
    if (F.exact) {
        auto f = [&](double tt) { return F.exact(lerp(tt)) - c; };
        if ((f(0) < 0) != (f(1) < 0))
            t = bisect(f);
        return lerp(t);
    }
    // 1D cubic through the four nodes on the grid line, away from the pole node
    int im = i - di, jm = j - dj, ip = i + 2 * di, jp = j + 2 * dj;
    if (im < 0 || jm < 0 || ip > s.nx || jp > s.ny)
        return lerp(t);
    for (int k = -1; k <= 2; ++k) {
        Point q = s.node(i + k * di, j + k * dj);
        if (std::hypot(q.x - F.pole.x, q.y - F.pole.y) < 1.5 * s.h)
            return lerp(t);
    }
    double v[4] = {F.G(im, jm) - c, g0, g1, F.G(ip, jp) - c};
    auto cubic = [&](double tt) {
        return -tt * (tt - 1) * (tt - 2) / 6.0 * v[0] + (tt + 1) * (tt - 1) * (tt - 2) / 2.0 * v[1] -
               (tt + 1) * tt * (tt - 2) / 2.0 * v[2] + (tt + 1) * tt * (tt - 1) / 6.0 * v[3];
    };
    return lerp(bisect(cubic));
}

} // namespace

Polyline level_set(const FundamentalSolution& F, double s_level) {
    if (!(s_level > 0.0))
        throw GeometryError("level_set", "level s must be positive");
    const auto& s = F.G.spec();
    const double c = std::log(s_level);
    auto below = [&](int i, int j) { return F.G(i, j) < c; };
    auto hid = [&](int i, int j) { return static_cast<std::uint64_t>(s.index(i, j)) * 2; };
    auto vid = [&](int i, int j) { return static_cast<std::uint64_t>(s.index(i, j)) * 2 + 1; };
    EdgeGraph g;
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) {
            bool b0 = below(i, j), b1 = below(i + 1, j), b2 = below(i + 1, j + 1), b3 = below(i, j + 1);
            std::uint64_t e[4] = {hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)};
            bool cross[4] = {b0 != b1, b1 != b2, b3 != b2, b0 != b3};
            int nc = cross[0] + cross[1] + cross[2] + cross[3];
            if (nc == 2) {
                std::uint64_t a = 0, b = 0;
                bool first = true;
                for (int k = 0; k < 4; ++k)
                    if (cross[k]) {
                        (first ? a : b) = e[k];
                        first = false;
                    }
                g.link(a, b);
            } else if (nc == 4) {
                double centre = 0.25 * (F.G(i, j) + F.G(i + 1, j) + F.G(i + 1, j + 1) + F.G(i, j + 1));
                if ((centre < c) == b0) {
                    g.link(e[0], e[1]);  // isolate corner 1
                    g.link(e[2], e[3]);  // isolate corner 3
                } else {
                    g.link(e[3], e[0]);
                    g.link(e[1], e[2]);
                }
            }
        }

    std::unordered_map<std::uint64_t, bool> seen;
    std::optional<Polyline> best;
    double best_radius = -1.0;
    for (const auto& [start, nb] : g.adj) {
        if (seen[start] || nb[1] < 0)
            continue;
        std::vector<std::uint64_t> loop{start};
        seen[start] = true;
        std::int64_t prev = -1;
        std::uint64_t cur = start;
        bool closed = false;
        while (true) {
            const auto& n2 = g.adj.at(cur);
            std::int64_t next = n2[0] != prev ? n2[0] : n2[1];
            if (n2[0] == n2[1])
                next = n2[0];
            if (next < 0)
                break;
            if (static_cast<std::uint64_t>(next) == start) {
                closed = true;
                break;
            }
            if (seen[static_cast<std::uint64_t>(next)])
                break;
            seen[static_cast<std::uint64_t>(next)] = true;
            prev = static_cast<std::int64_t>(cur);
            cur = static_cast<std::uint64_t>(next);
            loop.push_back(cur);
            if (g.adj.at(cur)[1] < 0)
                break;
        }
        if (!closed || loop.size() < 4)
            continue;
        Polyline p;
        p.vertices.reserve(loop.size());
        for (auto id : loop)
            p.vertices.push_back(edge_vertex(F, c, id));
        if (p.winding_number(F.pole) == 0)
            continue;
        double rad = p.max_distance_to(F.pole);
        if (rad > best_radius) {
            best_radius = rad;
            best = std::move(p);
        }
    }
    if (!best)
        throw GeometryError("level_set", "no closed level curve around the pole for s = " + std::to_string(s_level) +
                                             " (outside the resolvable range)");
    // consistent counter-clockwise orientation
    double area = 0.0;
    const auto& v = best->vertices;
    for (std::size_t a = 0; a < v.size(); ++a) {
        const auto& q = v[(a + 1) % v.size()];
        area += v[a].x * q.y - q.x * v[a].y;
    }
    if (area < 0)
        std::reverse(best->vertices.begin(), best->vertices.end());
    if (best->min_distance_to(F.pole) < 2.0 * s.h)
        throw GeometryError("level_set", "level curve for s = " + std::to_string(s_level) + " is within two cells of the pole");
    return *best;
}

double inradius(const Polyline& p, Point center) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : p.vertices)
        best = std::min(best, std::hypot(v.x - center.x, v.y - center.y));
    return best;
}
double circumradius(const Polyline& p, Point center) { return p.max_distance_to(center); }

// ---------------------------------------------------------------------------
// Atlas

QuasiBallAtlas::QuasiBallAtlas(FundamentalSolution F, const std::vector<double>& radii) : F_(std::move(F)) {
    for (double s : radii) {
        auto p = level_set(F_, s);
        sigma_[s] = inradius(p, F_.pole);
        rho_[s] = circumradius(p, F_.pole);
        circles_.emplace(s, std::move(p));
    }
}

const Polyline& QuasiBallAtlas::circle(double s) const {
    for (const auto& [k, p] : circles_)
        if (std::abs(k - s) <= 1e-12 * std::max(1.0, s))
            return p;
    throw GeometryError("atlas", "no quasi-circle stored for s = " + std::to_string(s));
}

bool QuasiBallAtlas::contains(Point z, double s) const { return F_.value(z) <= std::log(s); }

bool QuasiBallAtlas::nested() const {
    const Polyline* prev = nullptr;
    for (const auto& [s, p] : circles_) {
        if (prev)
            for (const auto& v : prev->vertices)
                if (!p.contains(v))
                    return false;
        prev = &p;
    }
    return true;
}

bool quasi_ball_membership(const QuasiBallAtlas& atlas, Point z, double s) { return atlas.contains(z, s); }

GeometryConstants geometry_constants(double lambda, const std::vector<const QuasiBallAtlas*>& atlases) {
    (void)lambda;
    GeometryConstants g;
    g.samples = atlases.size();
    for (const auto* a : atlases)
        for (const auto& [s, p] : a->circles()) {
            double in = a->sigma_hat(s), out = a->rho_hat(s);
            auto it = g.sigma_hat.find(s);
            g.sigma_hat[s] = it == g.sigma_hat.end() ? in : std::min(it->second, in);
            auto jt = g.rho_hat.find(s);
            g.rho_hat[s] = jt == g.rho_hat.end() ? out : std::max(jt->second, out);
        }
    if (!g.sigma_hat.count(1.0) || !g.rho_hat.count(1.4))
        throw GeometryError("geometry_constants", "atlases must include s = 1 and s = 7/5");
    g.b = g.sigma_hat.at(1.0);
    g.d = g.rho_hat.at(1.4) + 0.4;
    return g;
}

GeometryConstants geometry_constants(double lambda, const std::vector<CoefficientField>& samples,
                                     const std::vector<double>& radii) {
    if (samples.empty())
        throw GeometryError("geometry_constants", "empty operator sample set");
    std::vector<double> rs = radii;
    for (double need : {1.0, 1.4})
        if (std::find(rs.begin(), rs.end(), need) == rs.end())
            rs.push_back(need);
    std::sort(rs.begin(), rs.end());
    std::vector<QuasiBallAtlas> atlases;
    for (const auto& A : samples) {
        const auto& s = A.spec();
        double R = 0.5 * std::min(s.width(), s.height()) - s.h;
        atlases.emplace_back(fundamental_solution(A, {s.origin.x + 0.5 * s.width(), s.origin.y + 0.5 * s.height()}, R), rs);
    }
    std::vector<const QuasiBallAtlas*> ptrs;
    for (const auto& a : atlases)
        ptrs.push_back(&a);
    return geometry_constants(lambda, ptrs);
}

// ---------------------------------------------------------------------------
// Cache

AtlasCache::AtlasCache(std::string directory) : dir_(std::move(directory)) {
    if (!dir_.empty())
        std::filesystem::create_directories(dir_);
}

std::shared_ptr<const QuasiBallAtlas> AtlasCache::get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = map_.find(key);
    return it == map_.end() ? nullptr : it->second;
}

std::size_t AtlasCache::size() const {
    std::shared_lock lock(mutex_);
    return map_.size();
}

std::shared_ptr<const QuasiBallAtlas> AtlasCache::get_or_build(const std::string& key, const std::vector<double>& radii,
                                                               const std::function<FundamentalSolution()>& build,
                                                               bool* hit) {
    if (auto a = get(key)) {
        if (hit)
            *hit = true;
        return a;
    }
    std::optional<FundamentalSolution> F;
    bool from_disk = false;
    namespace fs = std::filesystem;
    if (!dir_.empty()) {
        fs::path bin = fs::path(dir_) / (key + ".bin"), meta = fs::path(dir_) / (key + ".json");
        if (fs::exists(bin) && fs::exists(meta)) {
            std::ifstream in(meta);
            auto j = nlohmann::json::parse(in);
            FundamentalSolution f;
            f.G = read_scalar_binary(bin.string());
            f.pole = {j.at("pole")[0], j.at("pole")[1]};
            f.domain_radius = j.at("domain_radius");
            if (j.contains("frozen")) {
                auto m = j.at("frozen");
                f.frozen = Mat2{m[0], m[1], m[2]};
            }
            if (j.value("closed_form", false))
                f.exact = closed_form(*f.frozen, f.pole);
            F = std::move(f);
            from_disk = true;
        }
    }
    if (!F) {
        F = build();
        if (!dir_.empty()) {
            fs::path bin = fs::path(dir_) / (key + ".bin"), meta = fs::path(dir_) / (key + ".json");
            write_binary(bin.string(), F->G);
            nlohmann::json j;
            j["pole"] = {F->pole.x, F->pole.y};
            j["domain_radius"] = F->domain_radius;
            j["normalization"] = F->normalization;
            j["closed_form"] = static_cast<bool>(F->exact);
            if (F->frozen)
                j["frozen"] = {F->frozen->a11, F->frozen->a12, F->frozen->a22};
            std::ofstream(meta) << j.dump(2) << '\n';
        }
    }
    auto atlas = std::make_shared<const QuasiBallAtlas>(std::move(*F), radii);
    std::unique_lock lock(mutex_);
    auto [it, fresh] = map_.try_emplace(key, atlas);
    if (hit)
        *hit = from_disk || !fresh;
    return it->second;
}

void write_polyline_csv(const std::string& path, const Polyline& p) {
    std::ofstream out(path);
    if (!out)
        throw Error("polyline", "cannot open " + path);
    out << "x,y\n" << std::setprecision(17);
    for (const auto& v : p.vertices)
        out << v.x << ',' << v.y << '\n';
}

} // namespace landis
