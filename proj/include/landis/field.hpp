#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "landis/errors.hpp"

namespace landis {

using Complex = std::complex<double>;

struct Point {
    double x = 0.0;
    double y = 0.0;

    Complex z() const { return {x, y}; }
    double norm() const;
};

/// Uniform node-centred grid on the rectangle
/// [origin.x, origin.x + nx*h] x [origin.y, origin.y + ny*h].
/// Nodes are indexed (i, j) with 0 <= i <= nx, 0 <= j <= ny, stored row-major
/// (row = j).
struct GridSpec {
    Point origin;
    int nx = 0;
    int ny = 0;
    double h = 0.0;

    GridSpec() = default;
    GridSpec(Point origin, int nx, int ny, double h);

    /// Square grid [-half_width, half_width]^2 with n cells per side.
    static GridSpec centered(double half_width, int n);

    int nodes_x() const { return nx + 1; }
    int nodes_y() const { return ny + 1; }
    std::size_t size() const { return static_cast<std::size_t>(nodes_x()) * nodes_y(); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nodes_x() + i; }
    double x(int i) const { return origin.x + i * h; }
    double y(int j) const { return origin.y + j * h; }
    Point node(int i, int j) const { return {x(i), y(j)}; }
    double width() const { return nx * h; }
    double height() const { return ny * h; }
    bool contains(Point p) const;
    bool is_boundary(int i, int j) const { return i == 0 || j == 0 || i == nx || j == ny; }

    /// Node closest to p (clamped into the grid).
    std::pair<int, int> nearest(Point p) const;

    bool operator==(const GridSpec& o) const;
};

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* stage);

class ScalarField {
public:
    ScalarField() = default;
    ScalarField(GridSpec spec, std::vector<double> values);
    ScalarField(GridSpec spec, double constant);

    static ScalarField from_function(const GridSpec& spec, const std::function<double(double, double)>& f);

    const GridSpec& spec() const { return spec_; }
    std::span<const double> values() const { return values_; }
    double operator()(int i, int j) const { return values_[spec_.index(i, j)]; }
    double operator[](std::size_t k) const { return values_[k]; }
    std::size_t size() const { return values_.size(); }

    /// Bilinear interpolation. Throws GeometryError outside the grid.
    double sample(Point p) const;
    /// Tensor 4x4 Lagrange interpolation (exact on bicubic polynomials); falls back
    /// to bilinear within one cell of the boundary.
    double sample_cubic(Point p) const;

    double max_abs() const;
    double min() const;
    double max() const;

    ScalarField map(const std::function<double(double)>& f) const;

    friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
    friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
    friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
    friend ScalarField operator*(double s, const ScalarField& a);

private:
    GridSpec spec_;
    std::vector<double> values_;
};

class ComplexField {
public:
    ComplexField() = default;
    ComplexField(GridSpec spec, std::vector<Complex> values);
    ComplexField(GridSpec spec, Complex constant);
    ComplexField(const ScalarField& re, const ScalarField& im);
    explicit ComplexField(const ScalarField& re);

    static ComplexField from_function(const GridSpec& spec, const std::function<Complex(Complex)>& f);

    const GridSpec& spec() const { return spec_; }
    std::span<const Complex> values() const { return values_; }
    Complex operator()(int i, int j) const { return values_[spec_.index(i, j)]; }
    Complex operator[](std::size_t k) const { return values_[k]; }
    std::size_t size() const { return values_.size(); }

    ScalarField re() const;
    ScalarField im() const;
    ScalarField abs() const;
    ComplexField conj() const;

    Complex sample(Point p) const;
    Complex sample_cubic(Point p) const;
    double max_abs() const;

    ComplexField map(const std::function<Complex(Complex)>& f) const;

    friend ComplexField operator+(const ComplexField& a, const ComplexField& b);
    friend ComplexField operator-(const ComplexField& a, const ComplexField& b);
    friend ComplexField operator*(const ComplexField& a, const ComplexField& b);
    friend ComplexField operator*(Complex s, const ComplexField& a);

private:
    GridSpec spec_;
    std::vector<Complex> values_;
};

// Finite differences: centred in the interior, one-sided second order on the edge.
ScalarField partial_x(const ScalarField& f);
ScalarField partial_y(const ScalarField& f);
ComplexField partial_x(const ComplexField& f);
ComplexField partial_y(const ComplexField& f);

struct Wirtinger {
    ComplexField d;    ///< ∂f = ½(f_x − i f_y)
    ComplexField dbar; ///< ∂̄f = ½(f_x + i f_y)
};

Wirtinger wirtinger(const ComplexField& f);

// ---------------------------------------------------------------------------
// Regions

struct Ball {
    Point center;
    double radius = 0.0;
};

/// Closed polygon; the last vertex connects back to the first.
struct Polyline {
    std::vector<Point> vertices;

    bool contains(Point p) const;  ///< even-odd rule
    int winding_number(Point p) const;
    double min_distance_to(Point p) const;
    double max_distance_to(Point p) const;
    std::size_t size() const { return vertices.size(); }
};

using Region = std::variant<Ball, Polyline>;

bool region_contains(const Region& region, Point p);

/// max |f| over nodes inside `region`, together with bilinear samples along the
/// region boundary. Throws GeometryError when no node or boundary sample lies on
/// the grid inside the region.
double sup_norm(const ScalarField& f, const Region& region);
double sup_norm(const ComplexField& f, const Region& region);

/// Plain maximum of |f| over all nodes.
double sup_norm(const ScalarField& f);
double sup_norm(const ComplexField& f);

// ---------------------------------------------------------------------------
// Serialization. Binary layout: five little-endian IEEE-754 doubles
// (nx, ny, h, origin.x, origin.y) followed by the node values row-major.
// Complex fields store the real plane followed by the imaginary plane.

void write_binary(const std::string& path, const ScalarField& f);
void write_binary(const std::string& path, const ComplexField& f);
ScalarField read_scalar_binary(const std::string& path);
ComplexField read_complex_binary(const std::string& path);

void write_csv(const std::string& path, const ScalarField& f);
void write_csv(const std::string& path, const ComplexField& f);

} // namespace landis
