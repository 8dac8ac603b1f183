#ifndef RATIO_LAB_ERRORS_HPP_
#define RATIO_LAB_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ratio_lab {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value (bad interval, odd batch size, unknown key, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Matrix/vector dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values encountered during training; carries the step index when known.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Evaluation produced an undefined or non-finite result.
class EvalError : public Error {
 public:
  using Error::Error;
};

/// A required checkpoint or data file does not exist or cannot be read.
class MissingArtifactError : public Error {
 public:
  using Error::Error;
};

}  // namespace ratio_lab

#endif  // RATIO_LAB_ERRORS_HPP_
