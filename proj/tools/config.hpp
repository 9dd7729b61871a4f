#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "landis/elliptic.hpp"

namespace landis::cli {

struct ExperimentConfig {
    std::uint64_t seed = 1;
    Variant variant = Variant::electric;

    double half_width = 2.43;
    int n = 256;

    std::string family = "trig";  // identity | constant | trig
    double lambda = 0.5, mu = 1.0;
    std::uint64_t coef_seed = 0;
    bool det_one = false;
    Mat2 matrix;

    std::vector<double> M_list = {1.0};
    std::uint64_t potential_seed = 0;
    bool with_W = false;
    double potential_freq = 1.0;

    std::uint64_t boundary_seed = 0;
    double boundary_offset = 1.0, boundary_amplitude = 0.5, boundary_freq = 1.0;

    std::optional<double> b, d;
    std::vector<double> radii = {0.5, 1.0, 1.2, 1.4};
    double pole_domain = 0.9;  // fundamental-solution domain radius as a fraction of the half width

    std::vector<double> s = {1.0, 1.2, 1.4};
    std::string f_kind = "power";  // power | sample
    int power = 3;
    double hat_r = 0.0;
    std::uint64_t hat_seed = 0;
    double hat_freq = 1.0;

    double C0 = 1.0;
    std::vector<double> fit_radii = {0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6};
    std::vector<double> report_radii = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0};

    std::vector<double> R_list = {4, 6, 8, 10, 12, 14, 16};
    int angles = 64;

    std::vector<double> lambdas = {0.2, 0.5, 0.9};
    int samples = 1000;

    double residual_tol = 1e-8, stream_tol = 0.25, three_circle_tol = 5e-2;

    /// Fully resolved form: every field explicit, seeds included.
    nlohmann::json to_json() const;
    std::string hash() const;
};

/// Parses the config text. ConfigError messages carry line/column for syntax
/// errors and the dotted field path for type or range errors. Seeds not given
/// explicitly derive from the master seed; `seed_override` / `grid_override`
/// replace the master seed and grid.n before derivation.
ExperimentConfig load_config(const std::string& text, std::optional<std::uint64_t> seed_override = {},
                             std::optional<int> grid_override = {});

ExperimentConfig load_config_file(const std::string& path, std::optional<std::uint64_t> seed_override = {},
                                  std::optional<int> grid_override = {});

} // namespace landis::cli
