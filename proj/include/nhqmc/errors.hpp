#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nhqmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: length mismatches, bad labels, non-power-of-two
/// matrices, parameters outside their domain.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A dense realization would exceed the configured qubit cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Non-convergence or a violated internal consistency check.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The Monte Carlo denominator mean cannot be distinguished from zero at the
/// current sample budget.
class DenominatorError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Configuration file problems; carries the offending line when known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::size_t line = 0)
      : Error(line == 0 ? message
                        : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace nhqmc
