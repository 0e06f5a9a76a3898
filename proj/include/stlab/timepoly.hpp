#pragma once

// Polynomial machinery on the reference slab [0,1] in the monomial basis s^i.

#include "stlab/common.hpp"

#include <numeric>
#include <string>
#include <vector>

namespace stlab {

using Int128 = __int128;

inline constexpr int kMaxTimeDegree = 12;

inline void check_degree(int q, const char* who) {
  if (q < 0 || q > kMaxTimeDegree) {
    throw ConditioningError(std::string(who) + ": degree " +
                            std::to_string(q) + " outside [0, 12]");
  }
}

inline Int128 binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  Int128 r = 1;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

inline std::string to_string(Int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v)
                            : static_cast<unsigned __int128>(v);
  std::string s;
  while (u > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  return {s.rbegin(), s.rend()};
}

/// Square matrix of 128-bit integers.
class IntMatrix {
 public:
  IntMatrix() = default;
  explicit IntMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * n, 0) {}
  int rows() const { return n_; }
  int cols() const { return n_; }
  Int128& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
  Int128 operator()(int i, int j) const {
    return a_[static_cast<size_t>(i) * n_ + j];
  }
  template <class S = double>
  Mat<S> cast() const {
    Mat<S> m(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = static_cast<S>((*this)(i, j));
    return m;
  }

 private:
  int n_ = 0;
  std::vector<Int128> a_;
};

/// A_ij = 1/(i+j+1), the Gram matrix of the monomials on [0,1].
template <class S = double>
Mat<S> hilbert_gram(int q) {
  check_degree(q, "hilbert_gram");
  Mat<S> a(q + 1, q + 1);
  for (int i = 0; i <= q; ++i)
    for (int j = 0; j <= q; ++j) a(i, j) = S(1) / S(i + j + 1);
  return a;
}

/// Closed-form integer inverse of hilbert_gram(q).
inline IntMatrix gram_inverse_formula(int q) {
  check_degree(q, "gram_inverse_formula");
  IntMatrix inv(q + 1);
  for (int i = 0; i <= q; ++i) {
    for (int j = 0; j <= q; ++j) {
      Int128 sum = 0;
      for (int k = std::max(i, j); k <= q; ++k) {
        sum += Int128(2 * k + 1) * binomial(k, i) * binomial(k + i, i) *
               binomial(k, j) * binomial(k + j, j);
      }
      inv(i, j) = ((i + j) % 2 == 0) ? sum : -sum;
    }
  }
  return inv;
}

/// Exact rational check of gram_inverse_formula(q) * hilbert_gram(q) = I.
/// Each row is scaled by lcm(1..2q+1) so all arithmetic stays integral.
inline bool gram_inverse_exact(int q) {
  check_degree(q, "gram_inverse_exact");
  const IntMatrix inv = gram_inverse_formula(q);
  long long lcm = 1;
  for (long long d = 1; d <= 2 * q + 1; ++d) lcm = std::lcm(lcm, d);
  const Int128 l = lcm;
  for (int i = 0; i <= q; ++i) {
    for (int c = 0; c <= q; ++c) {
      Int128 acc = 0;
      for (int j = 0; j <= q; ++j) acc += inv(i, j) * (l / (j + c + 1));
      if (acc != (i == c ? l : Int128(0))) return false;
    }
  }
  return true;
}

/// Shifted Legendre polynomials orthonormal on [0,1]. Row k holds the
/// monomial coefficients of P_k, so P_k(x) = sum_i L(k,i) x^i.
template <class S = double>
Mat<S> legendre_shifted(int q) {
  check_degree(q, "legendre_shifted");
  Mat<S> p = Mat<S>::Zero(q + 1, q + 1);
  for (int k = 0; k <= q; ++k) {
    const S scale = std::sqrt(S(2 * k + 1));
    for (int i = 0; i <= k; ++i) {
      const S c = static_cast<S>(binomial(k, i) * binomial(k + i, i));
      p(k, i) = ((k - i) % 2 == 0 ? scale : -scale) * c;
    }
  }
  return p;
}

/// Dual basis psi_i of the monomials: int_0^1 psi_i(s) s^j ds = delta_ij.
template <class S = double>
struct PsiBasis {
  int q = 0;
  Mat<S> coeffs;  // row i: monomial coefficients of psi_i

  /// Constant coefficient of psi_q.
  S psi_q0() const { return coeffs(q, 0); }
};

template <class S = double>
PsiBasis<S> psi_basis(int q) {
  check_degree(q, "psi_basis");
  PsiBasis<S> b;
  b.q = q;
  b.coeffs = gram_inverse_formula(q).cast<S>();
  return b;
}

/// Horner evaluation of sum_i c_i s^i.
template <class Derived, class S>
S poly_eval(const Eigen::DenseBase<Derived>& c, S s) {
  S r = 0;
  for (Eigen::Index i = c.size() - 1; i >= 0; --i) r = r * s + S(c(i));
  return r;
}

template <class S>
S poly_eval(const std::vector<S>& c, S s) {
  S r = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * s + *it;
  return r;
}

}  // namespace stlab
