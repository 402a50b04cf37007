#pragma once

#include <stdexcept>
#include <string>

namespace slicedmi {

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Malformed experiment configuration or CLI input.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnsupportedError : std::logic_error {
  using std::logic_error::logic_error;
};

// Base for failures of a numerical procedure on valid input. The CLI maps
// these to exit status 2.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularityError : NumericalError {
  using NumericalError::NumericalError;
};

struct ConvergenceError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace slicedmi
