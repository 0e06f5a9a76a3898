#pragma once

// Independent reference computations used by the tests. None of them call
// the routine they are compared against.

#include "stlab/stlab.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using stlab::Int128;
using stlab::Matrix;
using stlab::Vector;

inline Int128 abs128(Int128 a) { return a < 0 ? -a : a; }

inline Int128 gcd128(Int128 a, Int128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    const Int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

struct Fraction {
  Int128 num = 0;
  Int128 den = 1;

  Fraction() = default;
  Fraction(Int128 n, Int128 d = 1) : num(n), den(d) { reduce(); }
  void reduce() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const Int128 g = gcd128(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  friend Fraction operator-(Fraction a, Fraction b) {
    const Int128 g = gcd128(a.den, b.den);
    return Fraction(a.num * (b.den / g) - b.num * (a.den / g), a.den / g * b.den);
  }
  friend Fraction operator*(Fraction a, Fraction b) {
    const Int128 g1 = gcd128(a.num, b.den), g2 = gcd128(b.num, a.den);
    const Int128 d1 = g1 ? g1 : 1, d2 = g2 ? g2 : 1;
    return Fraction((a.num / d1) * (b.num / d2), (a.den / d2) * (b.den / d1));
  }
  friend Fraction operator/(Fraction a, Fraction b) { return a * Fraction(b.den, b.num); }
  bool is_zero() const { return num == 0; }
};

/// Inverse of the (q+1) Hilbert matrix by Gauss-Jordan elimination in exact
/// rational arithmetic.
inline std::vector<std::vector<Fraction>> rational_hilbert_inverse(int q) {
  const int n = q + 1;
  std::vector<std::vector<Fraction>> a(n, std::vector<Fraction>(2 * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i][j] = Fraction(1, i + j + 1);
    a[i][n + i] = Fraction(1);
  }
  for (int c = 0; c < n; ++c) {
    int p = c;
    while (a[p][c].is_zero()) ++p;
    std::swap(a[p], a[c]);
    const Fraction piv = a[c][c];
    for (auto& x : a[c]) x = x / piv;
    for (int r = 0; r < n; ++r) {
      if (r == c || a[r][c].is_zero()) continue;
      const Fraction f = a[r][c];
      for (int j = 0; j < 2 * n; ++j) a[r][j] = a[r][j] - f * a[c][j];
    }
  }
  std::vector<std::vector<Fraction>> inv(n, std::vector<Fraction>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv[i][j] = a[i][n + j];
  return inv;
}

/// Gauss-Legendre nodes on [0,1] via the Golub-Welsch eigenproblem.
inline std::pair<Vector, Vector> golub_welsch(int n) {
  Matrix J = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1);
    J(i, i - 1) = J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  Vector x = (es.eigenvalues().array() + 1) / 2;
  Vector w = es.eigenvectors().row(0).transpose().array().square();
  return {x, w};
}

/// P1 Dirichlet eigenvalues on a uniform mesh of n cells, length L.
inline double p1_eigenvalue(int j, int n, double L) {
  const double h = L / n;
  const double c = std::cos(j * std::numbers::pi / n);
  return 6.0 / (h * h) * (1 - c) / (2 + c);
}

/// Generalized eigenvalues of (K, M) from the nonsymmetric solver on
/// M^{-1} K, sorted ascending.
inline std::vector<double> brute_generalized_eigenvalues(const Matrix& K, const Matrix& M) {
  const Matrix A = M.fullPivLu().inverse() * K;
  Eigen::EigenSolver<Matrix> es(A);
  std::vector<double> ev;
  for (int i = 0; i < A.rows(); ++i) ev.push_back(es.eigenvalues()(i).real());
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// sup over u != 0 of l^T u / ||u||_G by random sampling followed by
/// Jacobi-preconditioned gradient ascent with exact line search. Uses
/// products with G only.
template <class Rng>
double mc_dual_norm(const Matrix& G, const Vector& l, Rng& rng, int samples = 10000,
                    int ascent_steps = 400) {
  const int n = static_cast<int>(l.size());
  std::normal_distribution<double> nd(0, 1);
  auto ratio = [&](const Vector& u) { return l.dot(u) / std::sqrt(u.dot(G * u)); };
  Vector best = Vector::Zero(n);
  double fbest = -1;
  Vector u(n);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) u(i) = nd(rng);
    double f = ratio(u);
    if (f < 0) {
      u = -u;
      f = -f;
    }
    if (f > fbest) {
      fbest = f;
      best = u;
    }
  }
  if (fbest <= 0) return 0;
  const Vector dinv = G.diagonal().cwiseInverse();
  u = best;
  for (int it = 0; it < ascent_steps; ++it) {
    const Vector Gu = G * u;
    const double a = l.dot(u), c = u.dot(Gu);
    const Vector grad = l / std::sqrt(c) - a * Gu / std::pow(c, 1.5);
    const Vector d = dinv.cwiseProduct(grad);
    const Vector Gd = G * d;
    const double b = l.dot(d), e = d.dot(Gu), g = d.dot(Gd);
    // maximize (a + t b) / sqrt(c + 2 t e + t^2 g)
    const double den = a * g - b * e;
    if (std::abs(den) < 1e-300) break;
    const double t = (b * c - a * e) / den;
    const Vector next = u + t * d;
    if (!(ratio(next) > ratio(u))) break;
    u = next;
  }
  return std::max(fbest, ratio(u));
}

/// Scalar theta recurrence amplification factor.
inline double theta_amplification(double theta, double k, double lambda) {
  return (1 - (1 - theta) * k * lambda) / (1 + theta * k * lambda);
}

/// Monomial coefficients of psi_0 from the rational inverse.
inline std::vector<double> psi0_coefficients(int q) {
  const auto inv = rational_hilbert_inverse(q);
  std::vector<double> c(q + 1);
  for (int p = 0; p <= q; ++p) c[p] = double(inv[0][p].num) / double(inv[0][p].den);
  return c;
}

/// Jump-corrected derivative of a dG function on slab m at local s, from
/// the definition (broken derivative plus psi_0(s)/k times the jump).
inline Vector dg_hat_derivative(const stlab::DgSolution<double>& w,
                                const std::vector<double>& psi0, int m, double s) {
  const double k = w.grid.k;
  Vector d = Vector::Zero(w.dim());
  for (int i = 1; i <= w.q; ++i) d += i * std::pow(s, i - 1) / k * Vector(w.coeff(m, i));
  double p0 = 0;
  for (int p = static_cast<int>(psi0.size()) - 1; p >= 0; --p) p0 = p0 * s + psi0[p];
  const Vector prev = m == 0 ? Vector(w.w0()) : Vector(w.slab(m - 1).rowwise().sum());
  return d + p0 / k * (Vector(w.coeff(m, 0)) - prev);
}

/// Shifted Legendre values P_0..P_q at 2s - 1 by the three-term recurrence.
inline std::vector<double> shifted_legendre(int q, double s) {
  std::vector<double> p(q + 1);
  const double x = 2 * s - 1;
  p[0] = 1;
  if (q >= 1) p[1] = x;
  for (int j = 1; j < q; ++j) p[j + 1] = ((2 * j + 1) * x * p[j] - j * p[j - 1]) / (j + 1);
  return p;
}

/// Functional l(v) = int <dhat w, v>_H over piecewise polynomial v of degree
/// q, and the V Gram matrix of that test space, both by Gauss quadrature.
/// The test basis on each slab is P_j(2s - 1) phi_i, which keeps G well
/// conditioned for the ascent.
inline std::pair<Vector, Matrix> dg_vprime_problem(const stlab::DgSolution<double>& w,
                                                   const stlab::SpaceTriple<double>& tr) {
  const int n = w.dim(), q = w.q, N = w.grid.N;
  const int nb = q + 1;
  const auto [x, wt] = golub_welsch(q + 3);
  const auto psi0 = psi0_coefficients(q);
  Vector l = Vector::Zero(N * nb * n);
  Matrix G = Matrix::Zero(N * nb * n, N * nb * n);
  for (int m = 0; m < N; ++m) {
    for (int p = 0; p < x.size(); ++p) {
      const double s = x(p), h = wt(p) * w.grid.k;
      const auto P = shifted_legendre(q, s);
      const Vector g = tr.gram_H() * dg_hat_derivative(w, psi0, m, s);
      for (int j = 0; j < nb; ++j) {
        l.segment((m * nb + j) * n, n) += h * P[j] * g;
        for (int i = 0; i < nb; ++i)
          G.block((m * nb + j) * n, (m * nb + i) * n, n, n) += h * P[i] * P[j] * tr.gram_U();
      }
    }
  }
  return {l, G};
}

/// Same for a theta solution: piecewise constant test functions.
inline std::pair<Vector, Matrix> theta_vprime_problem(const stlab::ThetaSolution<double>& w,
                                                      const stlab::SpaceTriple<double>& tr) {
  const int n = w.dim(), N = w.grid.N;
  const double k = w.grid.k;
  Vector l(N * n);
  Matrix G = Matrix::Zero(N * n, N * n);
  for (int m = 0; m < N; ++m) {
    l.segment(m * n, n) = tr.gram_H() * (w.w.col(m + 1) - w.w.col(m));
    G.block(m * n, m * n, n, n) = k * tr.gram_U();
  }
  return {l, G};
}

/// Random operator c I + K, rotated, with K skew of unit norm, scaled by
/// s. Its coercivity is c s and its Euclidean norm s sqrt(c^2 + 1), so
/// alpha / M equals rho exactly. rho = 1 gives s I. s is drawn so that
/// 1 <= M <= 3.
struct RandomOperator {
  Matrix A;
  double alpha = 0;
  double M = 0;
};

template <class Rng>
RandomOperator random_operator(int n, double rho, Rng& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> us(1.0, 3.0);
  const double c = rho < 1 ? rho / std::sqrt(1 - rho * rho) : 0.0;
  const double s = rho < 1 ? us(rng) / std::sqrt(c * c + 1) : us(rng);
  RandomOperator r;
  if (rho >= 1 || n == 1) {
    // a scalar operator cannot reach rho < 1
    const double s1 = us(rng);
    r.A = s1 * Matrix::Identity(n, n);
    r.alpha = r.M = s1;
    return r;
  }
  Matrix g(n, n);
  for (int i = 0; i < g.size(); ++i) g.data()[i] = nd(rng);
  Matrix K = g - g.transpose();
  K /= Eigen::JacobiSVD<Matrix>(K).singularValues()(0);
  Eigen::HouseholderQR<Matrix> qr(Matrix(n, n).unaryExpr([&](double) { return nd(rng); }));
  const Matrix Q = qr.householderQ();
  r.A = s * Q * (c * Matrix::Identity(n, n) + K) * Q.transpose();
  r.alpha = c * s;
  r.M = s * std::sqrt(c * c + 1);
  return r;
}

/// Random contraction with spectral norm exactly `norm`.
template <class Rng>
Matrix random_contraction(int n, double norm, Rng& rng) {
  std::normal_distribution<double> nd;
  Matrix g(n, n);
  for (int i = 0; i < g.size(); ++i) g.data()[i] = nd(rng);
  return norm * g / Eigen::JacobiSVD<Matrix>(g).singularValues()(0);
}

}  // namespace oracle
