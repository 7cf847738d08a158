#pragma once

#include <stdexcept>
#include <string>

namespace heatlab {

struct error : std::runtime_error {
    explicit error(const std::string &msg) : std::runtime_error(msg) {}
};

// Shape or size mismatch between operands.
struct dimension_error : error {
    using error::error;
};

// Structural precondition violated (symmetry, antisymmetry, Hermiticity).
struct structure_error : error {
    using error::error;
};

// Iterative method failed to reach its tolerance.
struct convergence_error : error {
    using error::error;
};

// Problem size exceeds the configured desk-scale cap.
struct capacity_error : error {
    using error::error;
};

// Singular or indefinite matrix where SPD was required.
struct singular_error : error {
    using error::error;
};

// Invalid input data (disconnected graph, nonpositive length, complex potential).
struct validation_error : error {
    using error::error;
};

// Argument outside the operation's domain (t <= 0, Dirichlet vertex, ...).
struct domain_error : error {
    using error::error;
};

// Required state not present (e.g. spectral data missing).
struct state_error : error {
    using error::error;
};

// Operation invoked outside its contract (e.g. symmetry check on a
// non-self-adjoint generator).
struct contract_error : error {
    using error::error;
};

// Regression/fit could not be performed (too few bins, degenerate data).
struct fit_error : error {
    using error::error;
};

// Malformed configuration or data file; the message names the offending field.
struct schema_error : error {
    using error::error;
};

} // namespace heatlab
