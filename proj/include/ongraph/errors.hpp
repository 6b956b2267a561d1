#pragma once

#include <stdexcept>
#include <string>

namespace ongraph {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or conflicting configuration (bad spec values, malformed flags).
struct ConfigError : Error {
    using Error::Error;
};

// Malformed external input data (ragged CSV rows, non-numeric fields).
struct IngestError : Error {
    using Error::Error;
};

// Shape or index mismatch in a numeric operation.
struct DimensionError : Error {
    using Error::Error;
};

// Numerical contract violation (indefinite covariance, diverged solve).
struct NumericError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace ongraph
