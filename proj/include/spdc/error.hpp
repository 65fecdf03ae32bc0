#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (non-square input, mismatched sizes).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, failed factorizations, non-positive eigenvalues.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A precondition on the arguments was violated.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Input is structurally valid but carries no usable signal (e.g. an
/// all-zero affinity matrix).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened or its contents are malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace spdc
