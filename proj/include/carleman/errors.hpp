#pragma once

#include <stdexcept>
#include <string>

namespace carleman {

// Base of every error raised by the library. The CLI maps NumericalError
// subclasses to exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// n * b exceeds the 64-bit key word, or an exponent does not fit in b bits.
class PackingOverflow : public UsageError {
 public:
  using UsageError::UsageError;
};

class InvalidDimension : public UsageError {
 public:
  using UsageError::UsageError;
};

class DimensionMismatch : public UsageError {
 public:
  using UsageError::UsageError;
};

class DegreeOutOfRange : public UsageError {
 public:
  using UsageError::UsageError;
};

class ArithmeticOverflow : public UsageError {
 public:
  using UsageError::UsageError;
};

class GridMismatch : public UsageError {
 public:
  using UsageError::UsageError;
};

class SingularMatrix : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StepSizeUnderflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace carleman
