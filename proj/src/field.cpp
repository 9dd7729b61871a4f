#include "landis/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numbers>

namespace landis {

double Point::norm() const { return std::hypot(x, y); }

GridSpec::GridSpec(Point origin_, int nx_, int ny_, double h_) : origin(origin_), nx(nx_), ny(ny_), h(h_) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw GeometryError("grid", "spacing must be positive and finite");
    if (nx < 8 || ny < 8)
        throw GeometryError("grid", "at least 8 cells per direction required");
}

GridSpec GridSpec::centered(double half_width, int n) {
    return GridSpec({-half_width, -half_width}, n, n, 2.0 * half_width / n);
}

bool GridSpec::contains(Point p) const {
    const double eps = 1e-12 * h;
    return p.x >= origin.x - eps && p.x <= origin.x + width() + eps && p.y >= origin.y - eps &&
           p.y <= origin.y + height() + eps;
}

std::pair<int, int> GridSpec::nearest(Point p) const {
    int i = static_cast<int>(std::lround((p.x - origin.x) / h));
    int j = static_cast<int>(std::lround((p.y - origin.y) / h));
    return {std::clamp(i, 0, nx), std::clamp(j, 0, ny)};
}

bool GridSpec::operator==(const GridSpec& o) const {
    return nx == o.nx && ny == o.ny && h == o.h && origin.x == o.origin.x && origin.y == o.origin.y;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* stage) {
    if (!(a == b))
        throw GridMismatch(stage, "fields live on different grids");
}

namespace {

template <class T>
void check_finite(const std::vector<T>& v) {
    for (const auto& x : v) {
        if constexpr (std::is_same_v<T, double>) {
            if (!std::isfinite(x))
                throw Error("field", "non-finite value");
        } else {
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
                throw Error("field", "non-finite value");
        }
    }
}

// Locates p inside the grid: cell (i, j) and local coordinates (tx, ty) in [0, 1].
struct CellLocation {
    int i, j;
    double tx, ty;
};

CellLocation locate(const GridSpec& s, Point p) {
    if (!s.contains(p))
        throw GeometryError("field", "sample point outside grid");
    double fx = (p.x - s.origin.x) / s.h;
    double fy = (p.y - s.origin.y) / s.h;
    int i = std::clamp(static_cast<int>(std::floor(fx)), 0, s.nx - 1);
    int j = std::clamp(static_cast<int>(std::floor(fy)), 0, s.ny - 1);
    return {i, j, std::clamp(fx - i, 0.0, 1.0), std::clamp(fy - j, 0.0, 1.0)};
}

template <class Get>
auto bilinear(const GridSpec& s, Point p, Get get) {
    auto c = locate(s, p);
    auto v00 = get(c.i, c.j), v10 = get(c.i + 1, c.j);
    auto v01 = get(c.i, c.j + 1), v11 = get(c.i + 1, c.j + 1);
    return (1 - c.ty) * ((1 - c.tx) * v00 + c.tx * v10) + c.ty * ((1 - c.tx) * v01 + c.tx * v11);
}

// Lagrange weights for nodes at -1, 0, 1, 2 evaluated at t in [0, 1].
std::array<double, 4> cubic_weights(double t) {
    return {-t * (t - 1) * (t - 2) / 6.0, (t + 1) * (t - 1) * (t - 2) / 2.0, -(t + 1) * t * (t - 2) / 2.0,
            (t + 1) * t * (t - 1) / 6.0};
}

template <class Get>
auto bicubic(const GridSpec& s, Point p, Get get) {
    auto c = locate(s, p);
    if (c.i < 1 || c.j < 1 || c.i > s.nx - 2 || c.j > s.ny - 2)
        return bilinear(s, p, get);
    auto wx = cubic_weights(c.tx);
    auto wy = cubic_weights(c.ty);
    decltype(get(0, 0)) acc{};
    for (int b = 0; b < 4; ++b) {
        decltype(get(0, 0)) row{};
        for (int a = 0; a < 4; ++a)
            row += wx[a] * get(c.i - 1 + a, c.j - 1 + b);
        acc += wy[b] * row;
    }
    return acc;
}

template <class T>
std::vector<T> diff_x(const GridSpec& s, std::span<const T> v) {
    std::vector<T> out(v.size());
    const double inv2h = 1.0 / (2.0 * s.h);
    const int n = s.nx;
    for (int j = 0; j <= s.ny; ++j) {
        auto at = [&](int i) { return v[s.index(i, j)]; };
        out[s.index(0, j)] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv2h;
        for (int i = 1; i < n; ++i)
            out[s.index(i, j)] = (at(i + 1) - at(i - 1)) * inv2h;
        out[s.index(n, j)] = (3.0 * at(n) - 4.0 * at(n - 1) + at(n - 2)) * inv2h;
    }
    return out;
}

template <class T>
std::vector<T> diff_y(const GridSpec& s, std::span<const T> v) {
    std::vector<T> out(v.size());
    const double inv2h = 1.0 / (2.0 * s.h);
    const int n = s.ny;
    for (int i = 0; i <= s.nx; ++i) {
        auto at = [&](int j) { return v[s.index(i, j)]; };
        out[s.index(i, 0)] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv2h;
        for (int j = 1; j < n; ++j)
            out[s.index(i, j)] = (at(j + 1) - at(j - 1)) * inv2h;
        out[s.index(i, n)] = (3.0 * at(n) - 4.0 * at(n - 1) + at(n - 2)) * inv2h;
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(GridSpec spec, std::vector<double> values) : spec_(spec), values_(std::move(values)) {
    if (values_.size() != spec_.size())
        throw GridMismatch("field", "value count does not match grid");
    check_finite(values_);
}

ScalarField::ScalarField(GridSpec spec, double constant) : spec_(spec), values_(spec.size(), constant) {
    check_finite(values_);
}

ScalarField ScalarField::from_function(const GridSpec& spec, const std::function<double(double, double)>& f) {
    std::vector<double> v(spec.size());
    for (int j = 0; j <= spec.ny; ++j)
        for (int i = 0; i <= spec.nx; ++i)
            v[spec.index(i, j)] = f(spec.x(i), spec.y(j));
    return {spec, std::move(v)};
}

double ScalarField::sample(Point p) const {
    return bilinear(spec_, p, [&](int i, int j) { return (*this)(i, j); });
}

double ScalarField::sample_cubic(Point p) const {
    return bicubic(spec_, p, [&](int i, int j) { return (*this)(i, j); });
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_)
        m = std::max(m, std::abs(v));
    return m;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

ScalarField ScalarField::map(const std::function<double(double)>& f) const {
    std::vector<double> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(), f);
    return {spec_, std::move(v)};
}

namespace {
template <class F, class Op>
F zip(const F& a, const F& b, Op op) {
    require_same_grid(a.spec(), b.spec(), "field");
    auto va = a.values();
    auto vb = b.values();
    std::vector<std::remove_cvref_t<decltype(va[0])>> out(va.size());
    for (std::size_t k = 0; k < va.size(); ++k)
        out[k] = op(va[k], vb[k]);
    return F(a.spec(), std::move(out));
}
} // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) { return zip(a, b, std::plus<>{}); }
ScalarField operator-(const ScalarField& a, const ScalarField& b) { return zip(a, b, std::minus<>{}); }
ScalarField operator*(const ScalarField& a, const ScalarField& b) { return zip(a, b, std::multiplies<>{}); }
ScalarField operator*(double s, const ScalarField& a) {
    return a.map([s](double v) { return s * v; });
}

// ---------------------------------------------------------------------------
// ComplexField

ComplexField::ComplexField(GridSpec spec, std::vector<Complex> values) : spec_(spec), values_(std::move(values)) {
    if (values_.size() != spec_.size())
        throw GridMismatch("field", "value count does not match grid");
    check_finite(values_);
}

ComplexField::ComplexField(GridSpec spec, Complex constant) : spec_(spec), values_(spec.size(), constant) {
    check_finite(values_);
}

ComplexField::ComplexField(const ScalarField& re, const ScalarField& im) : spec_(re.spec()) {
    require_same_grid(re.spec(), im.spec(), "field");
    values_.resize(re.size());
    for (std::size_t k = 0; k < values_.size(); ++k)
        values_[k] = {re[k], im[k]};
}

ComplexField::ComplexField(const ScalarField& re) : spec_(re.spec()) {
    values_.resize(re.size());
    for (std::size_t k = 0; k < values_.size(); ++k)
        values_[k] = re[k];
}

ComplexField ComplexField::from_function(const GridSpec& spec, const std::function<Complex(Complex)>& f) {
    std::vector<Complex> v(spec.size());
    for (int j = 0; j <= spec.ny; ++j)
        for (int i = 0; i <= spec.nx; ++i)
            v[spec.index(i, j)] = f({spec.x(i), spec.y(j)});
    return {spec, std::move(v)};
}

ScalarField ComplexField::re() const {
    std::vector<double> v(values_.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = values_[k].real();
    return {spec_, std::move(v)};
}

ScalarField ComplexField::im() const {
    std::vector<double> v(values_.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = values_[k].imag();
    return {spec_, std::move(v)};
}

ScalarField ComplexField::abs() const {
    std::vector<double> v(values_.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = std::abs(values_[k]);
    return {spec_, std::move(v)};
}

ComplexField ComplexField::conj() const {
    return map([](Complex c) { return std::conj(c); });
}

Complex ComplexField::sample(Point p) const {
    return bilinear(spec_, p, [&](int i, int j) { return (*this)(i, j); });
}

Complex ComplexField::sample_cubic(Point p) const {
    return bicubic(spec_, p, [&](int i, int j) { return (*this)(i, j); });
}

double ComplexField::max_abs() const {
    double m = 0.0;
    for (const auto& v : values_)
        m = std::max(m, std::abs(v));
    return m;
}

ComplexField ComplexField::map(const std::function<Complex(Complex)>& f) const {
    std::vector<Complex> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(), f);
    return {spec_, std::move(v)};
}

ComplexField operator+(const ComplexField& a, const ComplexField& b) { return zip(a, b, std::plus<>{}); }
ComplexField operator-(const ComplexField& a, const ComplexField& b) { return zip(a, b, std::minus<>{}); }
ComplexField operator*(const ComplexField& a, const ComplexField& b) { return zip(a, b, std::multiplies<>{}); }
ComplexField operator*(Complex s, const ComplexField& a) {
    return a.map([s](Complex v) { return s * v; });
}

// ---------------------------------------------------------------------------
// Derivatives

ScalarField partial_x(const ScalarField& f) { return {f.spec(), diff_x(f.spec(), f.values())}; }
ScalarField partial_y(const ScalarField& f) { return {f.spec(), diff_y(f.spec(), f.values())}; }
ComplexField partial_x(const ComplexField& f) { return {f.spec(), diff_x(f.spec(), f.values())}; }
ComplexField partial_y(const ComplexField& f) { return {f.spec(), diff_y(f.spec(), f.values())}; }

Wirtinger wirtinger(const ComplexField& f) {
    auto fx = diff_x(f.spec(), f.values());
    auto fy = diff_y(f.spec(), f.values());
    std::vector<Complex> d(fx.size()), dbar(fx.size());
    const Complex I(0.0, 1.0);
    for (std::size_t k = 0; k < fx.size(); ++k) {
        d[k] = 0.5 * (fx[k] - I * fy[k]);
        dbar[k] = 0.5 * (fx[k] + I * fy[k]);
    }
    return {ComplexField(f.spec(), std::move(d)), ComplexField(f.spec(), std::move(dbar))};
}

// ---------------------------------------------------------------------------
// Regions

bool Polyline::contains(Point p) const {
    bool inside = false;
    const std::size_t n = vertices.size();
    for (std::size_t a = 0, b = n - 1; a < n; b = a++) {
        const Point& pa = vertices[a];
        const Point& pb = vertices[b];
        if ((pa.y > p.y) != (pb.y > p.y)) {
            double xc = pa.x + (p.y - pa.y) * (pb.x - pa.x) / (pb.y - pa.y);
            if (p.x < xc)
                inside = !inside;
        }
    }
    return inside;
}

int Polyline::winding_number(Point p) const {
    double total = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t a = 0; a < n; ++a) {
        const Point& pa = vertices[a];
        const Point& pb = vertices[(a + 1) % n];
        double a1 = std::atan2(pa.y - p.y, pa.x - p.x);
        double a2 = std::atan2(pb.y - p.y, pb.x - p.x);
        double d = a2 - a1;
        while (d > std::numbers::pi)
            d -= 2 * std::numbers::pi;
        while (d < -std::numbers::pi)
            d += 2 * std::numbers::pi;
        total += d;
    }
    return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

double Polyline::min_distance_to(Point p) const {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = vertices.size();
    for (std::size_t a = 0; a < n; ++a) {
        const Point& pa = vertices[a];
        const Point& pb = vertices[(a + 1) % n];
        double dx = pb.x - pa.x, dy = pb.y - pa.y;
        double len2 = dx * dx + dy * dy;
        double t = len2 > 0 ? std::clamp(((p.x - pa.x) * dx + (p.y - pa.y) * dy) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, std::hypot(pa.x + t * dx - p.x, pa.y + t * dy - p.y));
    }
    return best;
}

double Polyline::max_distance_to(Point p) const {
    double best = 0.0;
    for (const auto& v : vertices)
        best = std::max(best, std::hypot(v.x - p.x, v.y - p.y));
    return best;
}

bool region_contains(const Region& region, Point p) {
    return std::visit(
        [&](const auto& r) -> bool {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, Ball>)
                return std::hypot(p.x - r.center.x, p.y - r.center.y) <= r.radius;
            else
                return r.contains(p);
        },
        region);
}

namespace {

std::vector<Point> boundary_samples(const Region& region, double h) {
    std::vector<Point> out;
    std::visit(
        [&](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, Ball>) {
                int n = std::max(16, static_cast<int>(std::ceil(4.0 * 2.0 * std::numbers::pi * r.radius / h)));
                for (int k = 0; k < n; ++k) {
                    double t = 2.0 * std::numbers::pi * k / n;
                    out.push_back({r.center.x + r.radius * std::cos(t), r.center.y + r.radius * std::sin(t)});
                }
            } else {
                const auto& v = r.vertices;
                for (std::size_t a = 0; a < v.size(); ++a) {
                    const Point& pb = v[(a + 1) % v.size()];
                    out.push_back(v[a]);
                    out.push_back({0.5 * (v[a].x + pb.x), 0.5 * (v[a].y + pb.y)});
                }
            }
        },
        region);
    return out;
}

// Conservative bounding box of a region, used to limit the node scan.
void region_bounds(const Region& region, double& x0, double& x1, double& y0, double& y1) {
    std::visit(
        [&](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, Ball>) {
                x0 = r.center.x - r.radius;
                x1 = r.center.x + r.radius;
                y0 = r.center.y - r.radius;
                y1 = r.center.y + r.radius;
            } else {
                x0 = y0 = std::numeric_limits<double>::infinity();
                x1 = y1 = -x0;
                for (const auto& p : r.vertices) {
                    x0 = std::min(x0, p.x);
                    x1 = std::max(x1, p.x);
                    y0 = std::min(y0, p.y);
                    y1 = std::max(y1, p.y);
                }
            }
        },
        region);
}

template <class F>
double sup_over(const F& f, const Region& region) {
    const GridSpec& s = f.spec();
    double x0, x1, y0, y1;
    region_bounds(region, x0, x1, y0, y1);
    int i0 = std::max(0, static_cast<int>(std::floor((x0 - s.origin.x) / s.h)));
    int i1 = std::min(s.nx, static_cast<int>(std::ceil((x1 - s.origin.x) / s.h)));
    int j0 = std::max(0, static_cast<int>(std::floor((y0 - s.origin.y) / s.h)));
    int j1 = std::min(s.ny, static_cast<int>(std::ceil((y1 - s.origin.y) / s.h)));
    bool any = false;
    double best = 0.0;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i)
            if (region_contains(region, s.node(i, j))) {
                any = true;
                best = std::max(best, std::abs(f(i, j)));
            }
    for (const auto& p : boundary_samples(region, s.h))
        if (s.contains(p)) {
            any = true;
            best = std::max(best, std::abs(f.sample(p)));
        }
    if (!any)
        throw GeometryError("sup_norm", "region does not intersect the grid");
    return best;
}

} // namespace

double sup_norm(const ScalarField& f, const Region& region) { return sup_over(f, region); }
double sup_norm(const ComplexField& f, const Region& region) { return sup_over(f, region); }
double sup_norm(const ScalarField& f) { return f.max_abs(); }
double sup_norm(const ComplexField& f) { return f.max_abs(); }

// ---------------------------------------------------------------------------
// Serialization

namespace {

void put_double(std::ofstream& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big)
        bits = __builtin_bswap64(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

double get_double(std::ifstream& in) {
    std::uint64_t bits = 0;
    in.read(reinterpret_cast<char*>(&bits), sizeof bits);
    if (!in)
        throw Error("field", "truncated binary field");
    if constexpr (std::endian::native == std::endian::big)
        bits = __builtin_bswap64(bits);
    return std::bit_cast<double>(bits);
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out)
        throw Error("field", "cannot open " + path + " for writing");
    return out;
}

void write_header(std::ofstream& out, const GridSpec& s) {
    put_double(out, s.nx);
    put_double(out, s.ny);
    put_double(out, s.h);
    put_double(out, s.origin.x);
    put_double(out, s.origin.y);
}

GridSpec read_header(std::ifstream& in) {
    double nx = get_double(in), ny = get_double(in), h = get_double(in);
    double ox = get_double(in), oy = get_double(in);
    return GridSpec({ox, oy}, static_cast<int>(nx), static_cast<int>(ny), h);
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("field", "cannot open " + path);
    return in;
}

} // namespace

void write_binary(const std::string& path, const ScalarField& f) {
    auto out = open_out(path, std::ios::binary);
    write_header(out, f.spec());
    for (double v : f.values())
        put_double(out, v);
}

void write_binary(const std::string& path, const ComplexField& f) {
    auto out = open_out(path, std::ios::binary);
    write_header(out, f.spec());
    for (const auto& v : f.values())
        put_double(out, v.real());
    for (const auto& v : f.values())
        put_double(out, v.imag());
}

ScalarField read_scalar_binary(const std::string& path) {
    auto in = open_in(path);
    GridSpec s = read_header(in);
    std::vector<double> v(s.size());
    for (auto& x : v)
        x = get_double(in);
    return {s, std::move(v)};
}

ComplexField read_complex_binary(const std::string& path) {
    auto in = open_in(path);
    GridSpec s = read_header(in);
    std::vector<Complex> v(s.size());
    for (auto& x : v)
        x.real(get_double(in));
    for (auto& x : v)
        x.imag(get_double(in));
    return {s, std::move(v)};
}

void write_csv(const std::string& path, const ScalarField& f) {
    auto out = open_out(path);
    out << "x,y,value\n" << std::setprecision(17);
    const auto& s = f.spec();
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i)
            out << s.x(i) << ',' << s.y(j) << ',' << f(i, j) << '\n';
}

void write_csv(const std::string& path, const ComplexField& f) {
    auto out = open_out(path);
    out << "x,y,re,im\n" << std::setprecision(17);
    const auto& s = f.spec();
    for (int j = 0; j <= s.ny; ++j)
        for (int i = 0; i <= s.nx; ++i)
            out << s.x(i) << ',' << s.y(j) << ',' << f(i, j).real() << ',' << f(i, j).imag() << '\n';
}

} // namespace landis
