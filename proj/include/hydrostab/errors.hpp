#pragma once

#include <stdexcept>
#include <string>

namespace hydrostab {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shape, placement, or grid mismatch: the call itself is malformed.
struct StructuralError : Error {
    using Error::Error;
};

/// Inputs violate a physical admissibility condition (e.g. density floor).
struct DomainError : Error {
    using Error::Error;
};

/// A solver failed to converge or a run lost numerical validity.
struct NumericalError : Error {
    using Error::Error;
};

/// Configuration file or CLI arguments are invalid.
struct ConfigurationError : Error {
    using Error::Error;
};

/// The growth-rate solver found no positive fixed point: the state shows no
/// instability at this resolution (Phi <= 0 across the probed bracket).
struct NoInstability : Error {
    using Error::Error;
};

}  // namespace hydrostab
