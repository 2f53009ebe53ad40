#pragma once

#include <stdexcept>

namespace schatten {

// Invalid inputs derive from invalid_argument, numerical failures from
// runtime_error, so callers can drop whole categories with one catch.
struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NotHermitian : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct InvalidP : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SignMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ZeroEigenvalue : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NotPsd : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SignCondition : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SingularB : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct TooCloseToSingularPoint : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SingularityTooClose : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct EmptyMeasure : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConvergenceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SmoothnessViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Overflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateSpectrum : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NullSpaceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NegativeResidualMass : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace schatten
