#pragma once

#include <stdexcept>
#include <string>

namespace risopt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree (vector lengths, matrix dimensions, index ranges).
class DimensionError : public Error {
public:
  using Error::Error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// theta + step * v has a zero-modulus entry, or W + step * V a zero column.
class DegenerateRetraction : public Error {
public:
  using Error::Error;
};

/// A configuration file or key-value pair could not be interpreted.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// No nonnegative power vector within the budget meets every rate target.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

} // namespace risopt
