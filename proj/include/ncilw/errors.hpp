#pragma once

#include <stdexcept>
#include <string>

namespace ncilw {

/// Evaluation requested too close to a kernel/lattice pole to retain any digits.
struct pole_proximity_error : std::domain_error {
    using std::domain_error::domain_error;
};

/// A pole configuration violates the strip condition that keeps the
/// ansatz kernels nonsingular.
struct strip_violation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two poles of the same family came closer than the collision threshold.
struct singular_configuration_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Initial data outside the window delta/2 < Im a < 3*delta/2.
struct window_violation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Adaptive stepping failed (dt underflow, max steps, ...).
struct integration_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Field blow-up or non-finite coefficients during time stepping.
struct instability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed run configuration or command-line input.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ncilw
