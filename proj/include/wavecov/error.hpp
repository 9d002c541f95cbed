#pragma once

#include <stdexcept>

namespace wavecov {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments, malformed inputs and model-spec rule violations.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Optimizer failures, singular systems, non-finite results.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wavecov
