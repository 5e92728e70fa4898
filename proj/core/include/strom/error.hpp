#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace strom {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside the documented domain of the operation.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied object breaks a stated contract (e.g. an adjoint that is
/// not the transpose of the forward map).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, std::size_t pivot)
      : Error(what), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// An iterative method hit its iteration cap; carries the last measured gap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Refusal to build a verification-only object above its size cap.
class CapExceededError : public Error {
 public:
  using Error::Error;
};

/// Malformed or corrupted on-disk data.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace strom
