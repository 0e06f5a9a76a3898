#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace stlab {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using Matrix = Mat<double>;
using Vector = Vec<double>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConditioningError : public Error {
 public:
  using Error::Error;
};

class ContractionViolation : public Error {
 public:
  ContractionViolation(double norm, const std::string& what)
      : Error(what), norm_(norm) {}
  double norm() const { return norm_; }

 private:
  double norm_;
};

class RescaleInfeasible : public Error {
 public:
  using Error::Error;
};

/// Raised when the coupled space-time system is (numerically) singular.
class SingularSchemeError : public Error {
 public:
  SingularSchemeError(double smallest_sv, double largest_sv,
                      const std::string& what)
      : Error(what), smallest_(smallest_sv), largest_(largest_sv) {}
  double smallest_singular_value() const { return smallest_; }
  double largest_singular_value() const { return largest_; }

 private:
  double smallest_;
  double largest_;
};

inline void require_dim(Eigen::Index got, Eigen::Index want,
                        const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected length " +
                         std::to_string(want) + ", got " +
                         std::to_string(got));
  }
}

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace stlab
