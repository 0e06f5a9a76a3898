#pragma once

// Exact space-time functions written as finite sums y_a(t) e_a of mutually
// orthogonal eigenfunctions e_a of the model operator, with closed-form
// norms and basis pairings.

#include "stlab/triple.hpp"

#include <functional>
#include <numbers>
#include <set>
#include <vector>

namespace stlab {

/// One eigenfunction e with ||e||_U^2 = Lambda * ||e||_H^2.
template <class S = double>
struct SpatialAtom {
  int mode = 0;
  S Lambda = 1;
  S h_norm2 = 1;
  Vec<S> pair_H;  // <e, phi_i>_H
  Vec<S> pair_U;  // <e, phi_i>_U
};

/// Mode `index` (0-based) of a spectral triple with eigenvalue Lambda.
/// Modes beyond the triple's dimension have zero pairings.
template <class S>
SpatialAtom<S> spectral_atom(const SpaceTriple<S>& t, int index, S Lambda) {
  if (t.kind() != TripleKind::spectral_diagonal)
    throw DomainError("spectral_atom: triple is not spectral");
  if (index < 0 || !(Lambda > 0)) throw DomainError("spectral_atom: bad mode");
  SpatialAtom<S> a;
  a.mode = index;
  a.Lambda = Lambda;
  a.h_norm2 = 1;
  a.pair_H = Vec<S>::Zero(t.dim());
  a.pair_U = Vec<S>::Zero(t.dim());
  if (index < t.dim()) {
    const S lam = t.params()[index];
    if (std::abs(lam - Lambda) > S(1e-12) * lam)
      throw DomainError("spectral_atom: Lambda does not match the triple");
    a.pair_H(index) = 1;
    a.pair_U(index) = lam;
  }
  return a;
}

/// sin((j+1) pi x / L) on a P1 triple, pairings by 5-point Gauss per cell.
template <class S>
SpatialAtom<S> sine_atom(const SpaceTriple<S>& t, int j) {
  if (t.kind() != TripleKind::p1_fem_dirichlet)
    throw DomainError("sine_atom: triple is not P1");
  const int cells = static_cast<int>(t.params()[0]);
  const S L = t.params()[1];
  const S h = L / cells;
  const S w = S(j + 1) * std::numbers::pi_v<S> / L;
  SpatialAtom<S> a;
  a.mode = j;
  a.Lambda = w * w;
  a.h_norm2 = L / 2;
  a.pair_H = Vec<S>::Zero(t.dim());
  a.pair_U = Vec<S>::Zero(t.dim());
  const auto g = gauss_legendre<S>(QuadraturePolicy::space_points_per_cell);
  for (int c = 0; c < cells; ++c) {
    for (int p = 0; p < g.size(); ++p) {
      const S x = (c + g.x[p]) * h;
      const S wt = g.w[p] * h;
      const S u = std::sin(w * x);
      const S du = w * std::cos(w * x);
      // left node of the cell is c, right node is c+1 (interior: 1..cells-1)
      if (c >= 1) {
        a.pair_H(c - 1) += wt * u * (1 - g.x[p]);
        a.pair_U(c - 1) += wt * du * (S(-1) / h);
      }
      if (c + 1 <= cells - 1) {
        a.pair_H(c) += wt * u * g.x[p];
        a.pair_U(c) += wt * du * (S(1) / h);
      }
    }
  }
  return a;
}

/// The index-th eigenfunction of the triple's model operator.
template <class S>
SpatialAtom<S> mode_atom(const SpaceTriple<S>& t, int index) {
  if (t.kind() == TripleKind::p1_fem_dirichlet) return sine_atom(t, index);
  if (index >= t.dim())
    throw DomainError("mode_atom: spectral mode outside the triple; pass "
                      "Lambda explicitly");
  return spectral_atom(t, index, t.params()[index]);
}

/// y(t, n) returns the n-th time derivative.
template <class S = double>
using TimeFn = std::function<S(S, int)>;

template <class S = double>
TimeFn<S> exp_time(S rate, S amplitude = 1) {
  return [=](S t, int n) {
    return amplitude * std::pow(rate, n) * std::exp(rate * t);
  };
}

/// amplitude cos(omega t + phase) and its derivatives.
template <class S = double>
TimeFn<S> cos_time(S omega, S phase = 0, S amplitude = 1) {
  return [=](S t, int n) {
    return amplitude * std::pow(omega, n) *
           std::cos(omega * t + phase + n * std::numbers::pi_v<S> / 2);
  };
}

/// Solution of y' + lambda y = cos(omega t) that is the sum of one cosine
/// and one sine.
template <class S = double>
TimeFn<S> cos_response_time(S lambda, S omega) {
  const S d = lambda * lambda + omega * omega;
  return [=](S t, int n) {
    const S sh = n * std::numbers::pi_v<S> / 2;
    return std::pow(omega, n) *
           (lambda * std::cos(omega * t + sh) + omega * std::sin(omega * t + sh)) /
           d;
  };
}

/// Polynomial sum_i c_i t^i.
template <class S = double>
TimeFn<S> poly_time(std::vector<S> c) {
  return [c = std::move(c)](S t, int n) {
    S r = 0;
    for (int i = static_cast<int>(c.size()) - 1; i >= n; --i) {
      S f = 1;
      for (int j = 0; j < n; ++j) f *= S(i - j);
      r = r * t + f * c[i];
    }
    return r;
  };
}

template <class S = double>
struct ModalTerm {
  SpatialAtom<S> atom;
  TimeFn<S> y;
  int max_order = 8;  // highest derivative y can provide
};

/// u(t) = sum_a y_a(t) e_a with distinct eigenfunction modes.
template <class S = double>
class ModalFunction {
 public:
  ModalFunction() = default;
  explicit ModalFunction(int dim) : dim_(dim) {}

  void add(SpatialAtom<S> atom, TimeFn<S> y, int max_order = 8) {
    if (atom.pair_H.size() != dim_)
      throw DimensionError("ModalFunction: atom pairing length mismatch");
    for (const auto& t : terms_) {
      if (t.atom.mode == atom.mode)
        throw DomainError("ModalFunction: modes must be distinct");
    }
    terms_.push_back({std::move(atom), std::move(y), max_order});
  }

  int dim() const { return dim_; }
  const std::vector<ModalTerm<S>>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  int smoothness() const {
    int s = 1 << 20;
    for (const auto& t : terms_) s = std::min(s, t.max_order);
    return s;
  }

  /// <u^{(order)}(t), phi_i>_H
  Vec<S> pair_H(S t, int order = 0) const {
    Vec<S> r = Vec<S>::Zero(dim_);
    for (const auto& a : terms_) r += value(a, t, order) * a.atom.pair_H;
    return r;
  }
  /// <u^{(order)}(t), phi_i>_U
  Vec<S> pair_U(S t, int order = 0) const {
    Vec<S> r = Vec<S>::Zero(dim_);
    for (const auto& a : terms_) r += value(a, t, order) * a.atom.pair_U;
    return r;
  }
  S norm2_H(S t, int order = 0) const {
    S r = 0;
    for (const auto& a : terms_) {
      const S y = value(a, t, order);
      r += y * y * a.atom.h_norm2;
    }
    return r;
  }
  S norm2_U(S t, int order = 0) const {
    S r = 0;
    for (const auto& a : terms_) {
      const S y = value(a, t, order);
      r += y * y * a.atom.h_norm2 * a.atom.Lambda;
    }
    return r;
  }
  /// ||u^{(order)}(t)||_{U'}^2
  S norm2_dual(S t, int order = 0) const {
    S r = 0;
    for (const auto& a : terms_) {
      const S y = value(a, t, order);
      r += y * y * a.atom.h_norm2 / a.atom.Lambda;
    }
    return r;
  }

 private:
  static S value(const ModalTerm<S>& a, S t, int order) {
    if (order > a.max_order)
      throw DomainError("ModalFunction: derivative order not available");
    return a.y(t, order);
  }

  int dim_ = 0;
  std::vector<ModalTerm<S>> terms_;
};

}  // namespace stlab
