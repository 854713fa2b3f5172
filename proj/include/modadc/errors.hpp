#pragma once

#include <stdexcept>
#include <string>

namespace modadc {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Floating-point precision or conditioning failure.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Operation invoked while the codec state violates its precondition.
class StateError : public Error {
 public:
  using Error::Error;
};

// Invalid or malformed configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filter design could not meet its specification.
class DesignError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace modadc
