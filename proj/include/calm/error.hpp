#pragma once

#include <stdexcept>
#include <string>

namespace calm {

/// Base for every error raised by the library. The CLI maps subclasses
/// onto its exit-code taxonomy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf where a finite value is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A row whose norm is below the cosine floor.
class DegenerateVectorError : public Error {
 public:
  using Error::Error;
};

/// Violated precondition of an API call.
class ContractError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Malformed embedding store or checkpoint; the message names the field.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace calm
