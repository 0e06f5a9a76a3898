#pragma once

#include "stlab/common.hpp"

#include <vector>

namespace stlab {

/// Gauss-Legendre rule mapped to [0,1].
template <class S = double>
struct GaussRule {
  std::vector<S> x;
  std::vector<S> w;
  int size() const { return static_cast<int>(x.size()); }
};

template <class S = double>
GaussRule<S> gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one point");
  GaussRule<S> r;
  r.x.resize(n);
  r.w.resize(n);
  const S pi = S(3.14159265358979323846264338327950288L);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    S z = std::cos(pi * (S(i) + S(0.75)) / (S(n) + S(0.5)));
    S dp = 0;
    for (int it = 0; it < 100; ++it) {
      S p0 = 1, p1 = 0;
      for (int j = 0; j < n; ++j) {
        S p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * z * p1 - j * p2) / (j + 1);
      }
      dp = n * (z * p0 - p1) / (z * z - 1);
      S dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < S(1e-16)) break;
    }
    // recompute derivative at the converged node
    S p0 = 1, p1 = 0;
    for (int j = 0; j < n; ++j) {
      S p2 = p1;
      p1 = p0;
      p0 = ((2 * j + 1) * z * p1 - j * p2) / (j + 1);
    }
    dp = n * (z * p0 - p1) / (z * z - 1);
    S wt = 2 / ((1 - z * z) * dp * dp);
    r.x[i] = (1 - z) / 2;
    r.x[n - 1 - i] = (1 + z) / 2;
    r.w[i] = wt / 2;
    r.w[n - 1 - i] = wt / 2;
  }
  return r;
}

/// Time quadrature orders used across the library; recorded in reports.
struct QuadraturePolicy {
  static constexpr int slab_average_points = 16;
  static constexpr int error_points = 31;
  static constexpr int delta_points = 9;
  static constexpr int space_points_per_cell = 5;
  static constexpr int sup_samples_per_slab = 32;
};

}  // namespace stlab
