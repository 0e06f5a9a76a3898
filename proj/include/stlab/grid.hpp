#pragma once

#include "stlab/timepoly.hpp"

#include <string>
#include <vector>

namespace stlab {

template <class S = double>
struct TimeGrid {
  S T = 1;
  int N = 1;
  S k = 1;

  S node(int m) const { return S(m) * k; }
};

/// Uniform grid with k = T/N; T is stored as k*N.
template <class S = double>
TimeGrid<S> make_grid(S T, int N) {
  if (!(T > 0) || N < 1) throw DomainError("make_grid: need T > 0, N >= 1");
  TimeGrid<S> g;
  g.N = N;
  g.k = T / S(N);
  g.T = g.k * S(N);
  return g;
}

/// Position of t in the grid: slab index m in [0, N) and local s in [0, 1].
/// `node` is the nearest node index when t sits on a node, else -1.
template <class S = double>
struct GridPoint {
  int slab = 0;
  S s = 0;
  int node = -1;
};

template <class S>
GridPoint<S> locate(const TimeGrid<S>& g, S t) {
  if (!(t >= -S(1e-14) * g.T && t <= g.T * (1 + S(1e-14))))
    throw DomainError("locate: t outside [0, T]");
  const S x = t / g.k;
  GridPoint<S> p;
  const S r = std::round(x);
  if (std::abs(x - r) <= S(1e-12) * std::max(S(1), std::abs(x))) {
    p.node = static_cast<int>(r);
  }
  int m = static_cast<int>(std::floor(x));
  m = std::clamp(m, 0, g.N - 1);
  p.slab = m;
  p.s = std::clamp(x - S(m), S(0), S(1));
  return p;
}

enum class SchemeKind { theta, dg };

template <class S = double>
struct BlockTerm {
  int block;
  S weight;
};

template <class S = double>
using Terms = std::vector<BlockTerm<S>>;

/// Block structure of the trial space W_n: theta scheme blocks are the
/// nodal vectors w^0..w^N; dG blocks are w0 followed by w_i^{(m)} slab by
/// slab. Each evaluator returns the linear combination of blocks giving the
/// requested quantity on slab m at local coordinate s.
template <class S = double>
struct SchemeLayout {
  SchemeKind kind = SchemeKind::theta;
  S theta = 1;
  int q = 0;
  TimeGrid<S> grid;
  int dim = 1;
  std::vector<S> psi0;  // monomial coefficients of psi_0 (dG)

  static SchemeLayout theta_layout(S theta, const TimeGrid<S>& g, int dim) {
    if (!(theta >= 0 && theta <= 1))
      throw DomainError("theta must lie in [0, 1]");
    SchemeLayout l;
    l.kind = SchemeKind::theta;
    l.theta = theta;
    l.grid = g;
    l.dim = dim;
    return l;
  }

  static SchemeLayout dg_layout(int q, const TimeGrid<S>& g, int dim) {
    check_degree(q, "dg_layout");
    SchemeLayout l;
    l.kind = SchemeKind::dg;
    l.q = q;
    l.grid = g;
    l.dim = dim;
    const IntMatrix inv = gram_inverse_formula(q);
    l.psi0.resize(q + 1);
    for (int p = 0; p <= q; ++p) l.psi0[p] = static_cast<S>(inv(0, p));
    return l;
  }

  int nblocks() const {
    return kind == SchemeKind::theta ? grid.N + 1 : 1 + grid.N * (q + 1);
  }
  int size() const { return nblocks() * dim; }
  int slab_block(int m, int i) const { return 1 + m * (q + 1) + i; }

  std::string describe() const {
    if (kind == SchemeKind::theta)
      return "theta(" + std::to_string(double(theta)) + ")";
    return "dg(" + std::to_string(q) + ")";
  }

  /// w(t) inside slab m (theta: the plateau value).
  Terms<S> value_terms(int m, S s) const {
    if (kind == SchemeKind::theta) return {{m + 1, theta}, {m, 1 - theta}};
    Terms<S> r;
    S p = 1;
    for (int i = 0; i <= q; ++i, p *= s) r.push_back({slab_block(m, i), p});
    return r;
  }

  /// The discrete derivative inside slab m (dG: jump-corrected).
  Terms<S> deriv_terms(int m, S s) const {
    const S k = grid.k;
    if (kind == SchemeKind::theta) return {{m + 1, 1 / k}, {m, -1 / k}};
    std::vector<S> w(nblocks(), 0);
    S p = 1;  // s^{i-1}
    for (int i = 1; i <= q; ++i, p *= s) w[slab_block(m, i)] += S(i) * p / k;
    const S c = poly_eval(psi0, s) / k;
    w[slab_block(m, 0)] += c;
    for (const auto& t : prev_end_terms(m)) w[t.block] -= c * t.weight;
    Terms<S> r;
    for (int b = 0; b < nblocks(); ++b)
      if (w[b] != 0) r.push_back({b, w[b]});
    return r;
  }

  /// w(0).
  Terms<S> start_terms() const { return {{0, 1}}; }

  /// w(T).
  Terms<S> end_terms() const {
    if (kind == SchemeKind::theta) return {{grid.N, 1}};
    return slab_end_terms(grid.N - 1);
  }

  /// Right end value of slab m (dG).
  Terms<S> slab_end_terms(int m) const {
    Terms<S> r;
    for (int i = 0; i <= q; ++i) r.push_back({slab_block(m, i), 1});
    return r;
  }

  /// Value at the left node of slab m seen from the previous slab (dG).
  Terms<S> prev_end_terms(int m) const {
    if (m == 0) return {{0, 1}};
    return slab_end_terms(m - 1);
  }
};

/// Evaluate a term list on a dim x nblocks coefficient matrix.
template <class S>
Vec<S> apply_terms(const Terms<S>& terms, const Mat<S>& blocks) {
  Vec<S> r = Vec<S>::Zero(blocks.rows());
  for (const auto& t : terms) r += t.weight * blocks.col(t.block);
  return r;
}

}  // namespace stlab
