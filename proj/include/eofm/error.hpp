#pragma once

#include <stdexcept>
#include <string>

namespace eofm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated preconditions: bad geometry, bad parameters, malformed input.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// An iterative solve that failed to reach its tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// CG met a direction of non-positive curvature; the operator is not SPD.
class IndefiniteOperator : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace eofm
