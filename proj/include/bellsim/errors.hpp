#pragma once

#include <stdexcept>
#include <string>

namespace bellsim {

/// Bad argument to a library operation (out-of-range efficiency, negative count, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// No optimizer restart met its convergence tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The efficiency bisection predicate did not bracket a threshold.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A run configuration document failed schema validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bellsim
