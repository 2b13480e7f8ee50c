#pragma once

#include <stdexcept>
#include <string>

namespace mnshape {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration problems: bad parameters, ranges, unsupported cases.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown that more working precision may cure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class PrecisionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UnsupportedCase : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DegenerateDegree : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class EmptySet : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NotDetermining : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularMatrix : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FormatError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace mnshape
