#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace cqi {

/// Short rendering of a real for error messages (keeps tiny values visible).
inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// A density-matrix invariant (hermiticity, trace, positivity) failed.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Probability mass reached the top of the truncated Fock space.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, long suggested_dim = 0)
      : Error(what), suggested_dim_(suggested_dim) {}
  long suggested_dim() const noexcept { return suggested_dim_; }

 private:
  long suggested_dim_;
};

/// Reference state (or state whose logarithm is needed) is not full rank.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

/// Integrator drifted beyond its trace/positivity tolerance.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace cqi
