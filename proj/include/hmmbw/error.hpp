#pragma once

#include <stdexcept>
#include <string>

namespace hmmbw {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter set, sequence or configuration breaks a stated invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Forward/backward/Viterbi could not be evaluated (impossible observation,
/// symbol out of range, scale overflow).
class InferenceError : public Error {
 public:
  using Error::Error;
};

/// Brute-force enumeration refused or failed.
class OracleError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a model, sequence file or report failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hmmbw
