#pragma once

#include <stdexcept>
#include <string>

namespace foldsense {

/// Bad user-supplied parameter or config value.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Degenerate geometry (coincident points, zero-length edges, ...).
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Inconsistent mesh connectivity (open rims where none expected, ...).
struct TopologyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Equilibrium solve failed to converge; carries the last gradient norm.
struct SolverError : std::runtime_error {
    SolverError(const std::string& msg, double residual_)
        : std::runtime_error(msg), residual(residual_) {}
    double residual;
};

}  // namespace foldsense
