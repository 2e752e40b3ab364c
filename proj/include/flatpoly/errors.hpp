#pragma once

#include <stdexcept>
#include <string>

namespace flatpoly {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class UncontrollableSystem : public Error {
 public:
  UncontrollableSystem(int rank, int n)
      : Error("system is not controllable: controllability rank " + std::to_string(rank) +
              " < n = " + std::to_string(n)),
        rank_(rank) {}
  int rank() const { return rank_; }

 private:
  int rank_;
};

class DegreeTooLow : public Error {
 public:
  using Error::Error;
};

class DegreeOutOfRange : public Error {
 public:
  using Error::Error;
};

/// Raised by the Cholesky certificate; carries the zero-based pivot that failed.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(int pivot, double value)
      : Error("cost Hessian is not positive definite (pivot " + std::to_string(pivot) +
              " = " + std::to_string(value) + ")"),
        pivot_(pivot) {}
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

class SingularF : public Error {
 public:
  using Error::Error;
};

class NonFinite : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace flatpoly
