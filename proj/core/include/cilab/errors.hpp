#pragma once

#include <stdexcept>
#include <string>

namespace cilab {

/// Invalid grid construction (side count too small, non-finite fill, ...).
struct GridError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Field or parameter shapes disagree.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Explicit-scheme stability bound violated.
struct StabilityError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Malformed binary container: bad magic, version, or truncation.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem or stream failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad configuration: unknown keys, missing fields, out-of-range values.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite loss or parameter encountered during optimization.
struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace cilab
