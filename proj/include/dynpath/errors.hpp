#pragma once

#include <stdexcept>
#include <string>

namespace dynpath {

// Bad user input: malformed config, inconsistent CSV, unknown labels.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Every event time was skipped (rank deficiency or risk sets too small),
// or there are no events at all.
struct NoUsableEventTimes : std::runtime_error {
  explicit NoUsableEventTimes(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure that is not recoverable by skipping a single event time,
// e.g. a negative hazard in the generator or a vanishing survivor fraction.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dynpath
