#pragma once

#include "stlab/common.hpp"

#include <Eigen/LU>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <limits>
#include <string>
#include <vector>

namespace stlab {

template <class S = double>
using SparseMat = Eigen::SparseMatrix<S>;

/// Relative threshold on sigma_min / sigma_max below which a scheme system
/// is declared singular.
inline constexpr double kSingularThreshold = 1e-12;

/// Add a dense block at (r0, c0) to a triplet list, skipping exact zeros.
template <class S, class Derived>
void add_block(std::vector<Eigen::Triplet<S>>& trip, int r0, int c0,
               const Eigen::MatrixBase<Derived>& b) {
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      if (b(i, j) != S(0))
        trip.emplace_back(r0 + static_cast<int>(i), c0 + static_cast<int>(j),
                          b(i, j));
}

template <class S = double>
struct SingularValueEstimate {
  S smallest = 0;
  S largest = 0;
};

/// Power iteration on B^T B for sigma_max and inverse iteration through the
/// LU factors for sigma_min.
template <class S>
SingularValueEstimate<S> estimate_singular_values(
    const SparseMat<S>& B,
    Eigen::SparseLU<SparseMat<S>, Eigen::COLAMDOrdering<int>>* lu,
    int iterations = 25) {
  const auto n = B.cols();
  SingularValueEstimate<S> e;
  Vec<S> x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = S(1) + S(i % 7) / S(10);
  x.normalize();
  S lam = 0;
  for (int it = 0; it < iterations; ++it) {
    Vec<S> y = B.transpose() * (B * x);
    lam = y.norm();
    if (lam == 0) break;
    x = y / lam;
  }
  e.largest = std::sqrt(lam);
  if (!lu) return e;
  for (Eigen::Index i = 0; i < n; ++i) x(i) = S(1) - S(i % 5) / S(9);
  x.normalize();
  S inv = 0;
  for (int it = 0; it < iterations; ++it) {
    Vec<S> z = lu->transpose().solve(x);
    Vec<S> y = lu->solve(z);
    inv = y.norm();
    if (!std::isfinite(double(inv)) || inv == 0) {
      inv = std::numeric_limits<S>::infinity();
      break;
    }
    x = y / inv;
  }
  e.smallest = std::isfinite(double(inv)) ? S(1) / std::sqrt(inv) : S(0);
  return e;
}

/// Sparse LU solve with singularity detection and a residual certificate.
template <class S>
Vec<S> solve_certified(const SparseMat<S>& B, const Vec<S>& rhs,
                       const std::string& what, S residual_tol = S(1e-9)) {
  Eigen::SparseLU<SparseMat<S>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(B);
  lu.factorize(B);
  if (lu.info() != Eigen::Success) {
    const auto est = estimate_singular_values<S>(B, nullptr);
    throw SingularSchemeError(0.0, double(est.largest),
                              what + ": factorization failed (singular)");
  }
  const auto est = estimate_singular_values<S>(B, &lu);
  if (!(est.smallest >= S(kSingularThreshold) * est.largest)) {
    throw SingularSchemeError(
        double(est.smallest), double(est.largest),
        what + ": singular system, sigma_min = " +
            std::to_string(double(est.smallest)) +
            ", sigma_max = " + std::to_string(double(est.largest)));
  }
  Vec<S> x = lu.solve(rhs);
  Vec<S> r = rhs - B * x;
  x += lu.solve(r);
  r = rhs - B * x;
  const S scale = est.largest * x.norm() + rhs.norm();
  if (!x.allFinite() || r.norm() > residual_tol * (scale > 0 ? scale : S(1))) {
    throw NumericalError(what + ": residual " + std::to_string(double(r.norm())) +
                         " not certified");
  }
  return x;
}

/// Dense solve used by marching paths.
template <class S>
Eigen::PartialPivLU<Mat<S>> factor_step(const Mat<S>& a,
                                        const std::string& what) {
  Eigen::PartialPivLU<Mat<S>> lu(a);
  const S rc = lu.rcond();
  if (!(rc >= S(kSingularThreshold))) {
    const S nrm = a.norm();
    throw SingularSchemeError(double(rc * nrm), double(nrm),
                              what + ": singular step matrix");
  }
  return lu;
}

}  // namespace stlab
