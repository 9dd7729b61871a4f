#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "landis/elliptic.hpp"

namespace landis {

/// Fundamental solution with pole at `pole`, normalized so that L G = 2π δ:
/// for A = I this is exactly ln|z − pole| and the quasi-circle Z_s is the circle
/// of radius s.
struct FundamentalSolution {
    ScalarField G;
    Point pole;
    double domain_radius = 0.0;
    std::string normalization = "2pi-delta: Laplacian Z_s has radius s";
    /// Closed form for constant coefficients; empty when G came from the solver.
    std::function<double(Point)> exact;
    std::optional<Mat2> frozen;  ///< matrix used for the closed form or the far-field data

    double value(Point p) const;  ///< exact when available, else bicubic interpolation
};

struct FundamentalSolutionOptions {
    bool force_numeric = false;
    double pole_exclusion = 3.0;  ///< in cells, for residual checks and level-set range
};

/// Closed form (1/√det A)[½ ln(zᵀA⁻¹z) − ln c_A], c_A = (λ₁^{-1/2} + λ₂^{-1/2})/2
/// the logarithmic capacity of the image of the unit circle.
double constant_fundamental_solution(const Mat2& A, Point z);

FundamentalSolution fundamental_solution(const CoefficientField& A, Point pole, double domain_radius,
                                         const FundamentalSolutionOptions& opt = {});

struct SandwichReport {
    double R1 = 0.5, R2 = 2.0;
    double C1 = 0, C2 = 0, C3 = 0, C4 = 0;  ///< realized near/far log constants
    double near_fit_slope = 0, near_fit_r2 = 0;
    bool mid_annulus_ok = false;            ///< C₂ log(R₁ − √2h) ≤ G ≤ C₄ log(R₂ + √2h) strictly between the circles
    double residual_off_pole = 0;           ///< ‖L_h G‖∞ outside the pole-exclusion disk
    bool far_available = false;
};

SandwichReport sandwich_report(const CoefficientField& A, const FundamentalSolution& F,
                               const FundamentalSolutionOptions& opt = {});

/// Closed polyline where G = ln s, encircling the pole. Marching squares with
/// vertices refined by root finding on the exact G or on a 1D cubic along the
/// grid line. Throws GeometryError when s is outside the resolvable range.
Polyline level_set(const FundamentalSolution& F, double s);

/// Both radii are measured at the vertices, which lie on the level set; chords of a
/// convex curve would understate the inradius by O(h²).
double inradius(const Polyline& p, Point center);
double circumradius(const Polyline& p, Point center);

class QuasiBallAtlas {
public:
    QuasiBallAtlas(FundamentalSolution F, const std::vector<double>& radii);

    const FundamentalSolution& source() const { return F_; }
    const std::map<double, Polyline>& circles() const { return circles_; }
    const Polyline& circle(double s) const;
    double sigma_hat(double s) const { return sigma_.at(s); }
    double rho_hat(double s) const { return rho_.at(s); }
    const std::map<double, double>& sigma_map() const { return sigma_; }
    const std::map<double, double>& rho_map() const { return rho_; }

    /// G(z) ≤ ln s with interpolated G.
    bool contains(Point z, double s) const;
    /// Every vertex of Z_{s} lies inside Z_{s'} for s < s'.
    bool nested() const;

private:
    FundamentalSolution F_;
    std::map<double, Polyline> circles_;
    std::map<double, double> sigma_, rho_;
};

bool quasi_ball_membership(const QuasiBallAtlas& atlas, Point z, double s);

struct GeometryConstants {
    double b = 0.0;  ///< σ̂(1)
    double d = 0.0;  ///< ρ̂(7/5) + 2/5
    std::map<double, double> sigma_hat, rho_hat;  ///< over all samples
    std::size_t samples = 0;
};

/// Empirical σ̂/ρ̂ over a finite operator sample set (all with ellipticity λ).
GeometryConstants geometry_constants(double lambda, const std::vector<CoefficientField>& samples,
                                     const std::vector<double>& radii = {0.5, 1.0, 1.4});
GeometryConstants geometry_constants(double lambda, const std::vector<const QuasiBallAtlas*>& atlases);

/// Concurrent-read, exclusive-insert cache of atlases keyed by a content hash.
/// With a directory set, fundamental solutions persist on disk and atlases are
/// rebuilt from them on a miss.
class AtlasCache {
public:
    explicit AtlasCache(std::string directory = {});

    std::shared_ptr<const QuasiBallAtlas> get(const std::string& key) const;
    std::shared_ptr<const QuasiBallAtlas> get_or_build(const std::string& key, const std::vector<double>& radii,
                                                       const std::function<FundamentalSolution()>& build,
                                                       bool* hit = nullptr);
    std::size_t size() const;

private:
    std::string dir_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, std::shared_ptr<const QuasiBallAtlas>> map_;
};

void write_polyline_csv(const std::string& path, const Polyline& p);

} // namespace landis
