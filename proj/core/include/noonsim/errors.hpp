#pragma once

#include <stdexcept>
#include <string>

namespace noonsim {

/// Base class for all library-specific failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Calibration file could not be parsed, violates probability bounds,
/// or a schedule requested a cat size absent from the table.
struct CalibrationError : Error {
    using Error::Error;
};

/// The posterior has zero likelihood at every grid point; no estimate exists.
struct DegeneratePosteriorError : Error {
    using Error::Error;
};

/// A schedule literal or other user-facing token could not be parsed.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace noonsim
