#pragma once

#include <stdexcept>
#include <string>

namespace seisint {

/// Raised when an argument violates a documented precondition.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation breaks down numerically (singular matrix,
/// non-finite state, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace seisint
