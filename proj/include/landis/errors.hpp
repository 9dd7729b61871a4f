#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace landis {

/// Base class for every failure raised by the library. `stage()` names the
/// pipeline stage (or module) that refused to continue.
class Error : public std::runtime_error {
public:
    Error(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Misconfigured geometry: empty regions, points off the grid, bad level values.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// A mathematical hypothesis (ellipticity, sign of V, contraction, ...) is violated.
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// Linear or fixed-point solver did not deliver a solution within tolerance.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Two fields live on different grids.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// Malformed configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace landis
