#pragma once

#include <stdexcept>

namespace propimp {

// Estimation-level failure: a fitter or an iteration could not produce a
// value for a structural reason. Contract violations (bad arguments, malformed
// data) use std::invalid_argument instead.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A score or profile equation has no root in the admissible parameter range.
class NoRootError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// Censored-data fit requested with zero observed events.
class NoEventsError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// Conditional sampling on [a, b] with a < b but zero probability mass.
class DegenerateIntervalError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

}  // namespace propimp
