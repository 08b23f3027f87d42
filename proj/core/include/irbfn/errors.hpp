#pragma once

#include <stdexcept>
#include <string>

namespace irbfn {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric argument violates an operation's precondition (e.g. s_f <= 0).
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

// A grid, partition, or training configuration is malformed.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A persisted LUT or model file failed a structural check.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The file declares a version this reader does not understand.
class UnsupportedVersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// A query point lies outside the domain covered by a table or model.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A nearest-neighbor lookup landed on a record flagged invalid.
class LookupMissError : public Error {
 public:
  using Error::Error;
};

// The solver produced a non-finite iterate.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Training cannot proceed (empty data, non-finite gradients).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace irbfn
