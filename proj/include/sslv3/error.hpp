#pragma once

#include <stdexcept>
#include <string>

namespace sslv3 {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor shapes do not satisfy an operation's contract.
struct DimensionError : Error {
    using Error::Error;
};

/// An argument value is outside its documented domain (bad kernel size,
/// out-of-range label, degenerate quality range, K > subject count, ...).
struct ValueError : Error {
    using Error::Error;
};

/// An operation was invoked in the wrong phase (backward outside a recorded
/// graph, subject loss on an empty ledger, ...).
struct StateError : Error {
    using Error::Error;
};

/// A forward computation produced a non-finite value, or a numeric check
/// could not be evaluated.
struct NumericError : Error {
    using Error::Error;
};

/// Inconsistent dataset contents: conflicting subject labels, malformed
/// manifests, unreadable frames.
struct DataError : Error {
    using Error::Error;
};

/// Unreadable or incompatible checkpoint file.
struct CheckpointError : Error {
    using Error::Error;
};

/// The classification loss produced no gradient path into the quality head.
struct CouplingError : Error {
    using Error::Error;
};

}  // namespace sslv3
