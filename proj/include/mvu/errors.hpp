#pragma once

#include <stdexcept>
#include <string>

namespace mvu {

/// Bad input: parameters out of range, malformed configs, wrong model.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite values or a numerical routine that could not make progress.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The r-neighborhood graph has more than one component, so the discrete
/// program is unbounded.
class DisconnectedGraph : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Operation needs a reference isometry the model does not have.
class NoIsometry : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace mvu
