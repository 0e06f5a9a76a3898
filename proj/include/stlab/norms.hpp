#pragma once

#include "stlab/dg_scheme.hpp"
#include "stlab/modal.hpp"
#include "stlab/theta_scheme.hpp"

#include <Eigen/Eigenvalues>

#include <memory>
#include <string>

namespace stlab {

/// How a NormBundle was computed.
struct NormMeta {
  std::string sup_method = "exact";
  int time_points = 0;     // Gauss points per integration cell
  int subdivisions = 1;    // integration cells per slab
  int sup_samples = 0;     // interior sup samples per slab, 0 when exact
  std::string reference;   // what the error was measured against
};

template <class S = double>
struct NormBundle {
  S vprime_deriv = 0;
  S v_norm = 0;
  S sup_h = 0;
  S trace0 = 0;
  S traceT = 0;
  S z_surrogate = 0;
  NormMeta meta;

  void finish() {
    z_surrogate = std::sqrt(vprime_deriv * vprime_deriv + v_norm * v_norm +
                            trace0 * trace0 + traceT * traceT);
  }
};

// ---------------------------------------------------------------- discrete

template <class S>
S v_norm(const ThetaSolution<S>& sol, const SpaceTriple<S>& tr) {
  S acc = 0;
  for (int m = 0; m < sol.grid.N; ++m) acc += sol.grid.k * tr.norm2_U(sol.plateau(m));
  return std::sqrt(acc);
}

template <class S>
S v_norm(const DgSolution<S>& sol, const SpaceTriple<S>& tr) {
  const Mat<S> A = hilbert_gram<S>(sol.q);
  S acc = 0;
  for (int m = 0; m < sol.grid.N; ++m) {
    const Mat<S> c = sol.slab(m);
    const Mat<S> kc = tr.gram_U() * c;
    acc += sol.grid.k * (A.cwiseProduct(c.transpose() * kc)).sum();
  }
  return std::sqrt(std::max(S(0), acc));
}

/// sqrt(sum_m k (M d_m)^T K^{-1} (M d_m))
template <class S>
S hat_derivative_vprime_norm(const ThetaSolution<S>& sol, const SpaceTriple<S>& tr) {
  const Mat<S> d = discrete_derivative(sol);
  const Mat<S> l = tr.gram_H() * d;
  const Mat<S> y = tr.llt_U().matrixL().solve(l);
  return std::sqrt(sol.grid.k * y.squaredNorm());
}

/// Per slab k l^T (A (x) K)^{-1} l with l = (A (x) M) D, using the integer
/// inverse of A.
template <class S>
S hat_derivative_vprime_norm(const DgSolution<S>& sol, const SpaceTriple<S>& tr,
                             const PsiBasis<S>& psi) {
  const Mat<S> A = hilbert_gram<S>(sol.q);
  const Mat<S>& Ainv = psi.coeffs;
  const auto der = corrected_derivative(sol, psi);
  S acc = 0;
  for (const auto& c : der) {
    const Mat<S> l = tr.gram_H() * c * A;         // column j: sum_p A_pj M c_p
    const Mat<S> z = tr.llt_U().solve(l) * Ainv;  // (A^{-1} (x) K^{-1}) l
    acc += sol.grid.k * l.cwiseProduct(z).sum();
  }
  return std::sqrt(std::max(S(0), acc));
}

template <class S>
S sup_h_norm(const ThetaSolution<S>& sol, const SpaceTriple<S>& tr) {
  S best = 0;
  for (int m = 0; m <= sol.grid.N; ++m) best = std::max(best, tr.norm2_H(sol.w.col(m)));
  for (int m = 0; m < sol.grid.N; ++m) best = std::max(best, tr.norm2_H(sol.plateau(m)));
  return std::sqrt(best);
}

namespace detail {

/// Maximum of a polynomial (ascending coefficients) on [0, 1] from its
/// stationary points. Returns false if the root finder fails.
template <class S>
bool poly_max_01(const std::vector<S>& p, S& out) {
  S best = std::max(poly_eval(p, S(0)), poly_eval(p, S(1)));
  std::vector<S> d;
  for (size_t i = 1; i < p.size(); ++i) d.push_back(S(i) * p[i]);
  S scale = 0;
  for (S c : p) scale = std::max(scale, std::abs(c));
  while (!d.empty() && std::abs(d.back()) <= S(1e-14) * std::max(scale, S(1e-300)))
    d.pop_back();
  if (d.size() >= 2) {
    const int n = static_cast<int>(d.size()) - 1;
    Mat<S> comp = Mat<S>::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -d[i] / d[n];
    Eigen::EigenSolver<Mat<S>> es(comp, false);
    if (es.info() != Eigen::Success) return false;
    for (int i = 0; i < n; ++i) {
      const auto z = es.eigenvalues()(i);
      if (std::abs(z.imag()) > S(1e-8)) continue;
      const S s = z.real();
      if (s > 0 && s < 1) best = std::max(best, poly_eval(p, s));
    }
  }
  out = best;
  return true;
}

}  // namespace detail

/// sup_t ||w(t)||_H: stationary points of s -> ||w(s)||_H^2 per slab, with a
/// 64-point Chebyshev sampling fallback.
template <class S>
S sup_h_norm(const DgSolution<S>& sol, const SpaceTriple<S>& tr,
             std::string* method = nullptr) {
  const int q = sol.q;
  S best = tr.norm2_H(Vec<S>(sol.w0()));
  bool fallback = false;
  for (int m = 0; m < sol.grid.N; ++m) {
    const Mat<S> c = sol.slab(m);
    const Mat<S> g = c.transpose() * tr.gram_H() * c;
    std::vector<S> p(2 * q + 1, 0);
    for (int i = 0; i <= q; ++i)
      for (int j = 0; j <= q; ++j) p[i + j] += g(i, j);
    S v = 0;
    if (!detail::poly_max_01(p, v)) {
      fallback = true;
      v = 0;
      for (int r = 0; r < 64; ++r) {
        const S s = (1 - std::cos(std::numbers::pi_v<S> * r / 63)) / 2;
        v = std::max(v, poly_eval(p, s));
      }
    }
    best = std::max(best, v);
  }
  if (method) *method = fallback ? "chebyshev-64" : "stationary-points";
  return std::sqrt(std::max(S(0), best));
}

/// Time integral of <dhat w, w>_H.
template <class S>
S derivative_pairing(const ThetaSolution<S>& sol, const SpaceTriple<S>& tr) {
  const Mat<S> d = discrete_derivative(sol);
  S acc = 0;
  for (int m = 0; m < sol.grid.N; ++m)
    acc += sol.grid.k * d.col(m).dot(tr.gram_H() * sol.plateau(m));
  return acc;
}

template <class S>
S derivative_pairing(const DgSolution<S>& sol, const SpaceTriple<S>& tr,
                     const PsiBasis<S>& psi) {
  const Mat<S> A = hilbert_gram<S>(sol.q);
  const auto der = corrected_derivative(sol, psi);
  S acc = 0;
  for (int m = 0; m < sol.grid.N; ++m) {
    const Mat<S> c = sol.slab(m);
    acc += sol.grid.k * A.cwiseProduct(der[m].transpose() * tr.gram_H() * c).sum();
  }
  return acc;
}

template <class S>
NormBundle<S> norm_bundle(const ThetaSolution<S>& sol, const SpaceTriple<S>& tr) {
  NormBundle<S> b;
  b.vprime_deriv = hat_derivative_vprime_norm(sol, tr);
  b.v_norm = v_norm(sol, tr);
  b.sup_h = sup_h_norm(sol, tr);
  b.trace0 = std::sqrt(tr.norm2_H(sol.w.col(0)));
  b.traceT = std::sqrt(tr.norm2_H(sol.w.col(sol.grid.N)));
  b.meta.sup_method = "nodes-and-plateaus";
  b.meta.reference = "self";
  b.finish();
  return b;
}

template <class S>
NormBundle<S> norm_bundle(const DgSolution<S>& sol, const SpaceTriple<S>& tr,
                          const PsiBasis<S>& psi) {
  NormBundle<S> b;
  b.vprime_deriv = hat_derivative_vprime_norm(sol, tr, psi);
  b.v_norm = v_norm(sol, tr);
  b.sup_h = sup_h_norm(sol, tr, &b.meta.sup_method);
  b.trace0 = std::sqrt(tr.norm2_H(Vec<S>(sol.w0())));
  b.traceT = std::sqrt(tr.norm2_H(sol.end_value(sol.grid.N - 1)));
  b.meta.reference = "self";
  b.finish();
  return b;
}

// ------------------------------------------------------------ interpolants

template <class S>
ThetaSolution<S> interpolate_theta(const ModalFunction<S>& u, const SpaceTriple<S>& tr,
                                   const TimeGrid<S>& grid, S theta) {
  ThetaSolution<S> s;
  s.theta = theta;
  s.grid = grid;
  s.w.resize(tr.dim(), grid.N + 1);
  for (int m = 0; m <= grid.N; ++m) s.w.col(m) = tr.llt_U().solve(u.pair_U(grid.node(m)));
  return s;
}

/// w_i^{(m)} = (k^i / i!) P_U u^{(i)}(m k), w0 = P_U u(0).
template <class S>
DgSolution<S> interpolate_dg(const ModalFunction<S>& u, const SpaceTriple<S>& tr,
                             const TimeGrid<S>& grid, int q) {
  if (u.smoothness() < q)
    throw DomainError("interpolate_dg: derivatives up to order q required");
  auto s = DgSolution<S>::zeros(q, grid, tr.dim());
  s.w0() = tr.llt_U().solve(u.pair_U(S(0)));
  for (int m = 0; m < grid.N; ++m) {
    S f = 1;
    for (int i = 0; i <= q; ++i) {
      if (i > 0) f *= grid.k / S(i);
      s.coeff(m, i) = f * tr.llt_U().solve(u.pair_U(grid.node(m), i));
    }
  }
  return s;
}

/// ||v - P_U v||_V by 9-point Gauss per slab.
template <class S>
S delta_n(const ModalFunction<S>& v, const SpaceTriple<S>& tr, const TimeGrid<S>& grid) {
  const auto g = gauss_legendre<S>(QuadraturePolicy::delta_points);
  S acc = 0;
  for (int m = 0; m < grid.N; ++m) {
    for (int p = 0; p < g.size(); ++p) {
      const S t = grid.node(m) + g.x[p] * grid.k;
      const Vec<S> pu = v.pair_U(t);
      const S tail = v.norm2_U(t) - pu.dot(tr.llt_U().solve(pu));
      acc += g.w[p] * grid.k * std::max(S(0), tail);
    }
  }
  return std::sqrt(acc);
}

// ------------------------------------------------------------------ targets

/// A function of time seen through pairings with the basis of a (coarse)
/// triple. Errors of discrete functions are measured against it.
template <class S = double>
class Target {
 public:
  virtual ~Target() = default;
  virtual int dim() const = 0;
  /// <u(t), phi_i>_H; `side` matters only at discontinuities.
  virtual Vec<S> pair_H(S t, Side side) const = 0;
  virtual Vec<S> pair_U(S t) const = 0;
  /// <u'(t), phi_i>_H away from breakpoints.
  virtual Vec<S> pair_H_deriv(S t) const = 0;
  virtual S norm2_H(S t, Side side) const = 0;
  virtual S norm2_U(S t) const = 0;
  /// Integration cells per coarse slab (breakpoints of the target).
  virtual int subdivisions() const { return 1; }
  virtual std::string describe() const = 0;
};

template <class S = double>
class ModalTarget : public Target<S> {
 public:
  explicit ModalTarget(ModalFunction<S> u) : u_(std::move(u)) {}
  int dim() const override { return u_.dim(); }
  Vec<S> pair_H(S t, Side) const override { return u_.pair_H(t); }
  Vec<S> pair_U(S t) const override { return u_.pair_U(t); }
  Vec<S> pair_H_deriv(S t) const override { return u_.pair_H(t, 1); }
  S norm2_H(S t, Side) const override { return u_.norm2_H(t); }
  S norm2_U(S t) const override { return u_.norm2_U(t); }
  std::string describe() const override { return "exact-modal"; }
  const ModalFunction<S>& function() const { return u_; }

 private:
  ModalFunction<S> u_;
};

/// A discrete solution on a finer grid and finer nested triple, paired with
/// the coarse basis through the prolongation R (fine coefficients of the
/// coarse basis functions).
template <class S = double>
class DiscreteTarget : public Target<S> {
 public:
  DiscreteTarget(SchemeLayout<S> layout, Mat<S> blocks, const SpaceTriple<S>& fine,
                 Mat<S> prolong, int refine_time)
      : layout_(std::move(layout)),
        blocks_(std::move(blocks)),
        Mf_(fine.gram_H()),
        Kf_(fine.gram_U()),
        RtM_(prolong.transpose() * fine.gram_H()),
        RtK_(prolong.transpose() * fine.gram_U()),
        refine_(refine_time) {}

  static DiscreteTarget from(const ThetaSolution<S>& s, const SpaceTriple<S>& fine,
                             const Mat<S>& prolong, int refine_time) {
    return DiscreteTarget(s.layout(), s.w, fine, prolong, refine_time);
  }
  static DiscreteTarget from(const DgSolution<S>& s, const SpaceTriple<S>& fine,
                             const Mat<S>& prolong, int refine_time) {
    return DiscreteTarget(s.layout(), s.blocks, fine, prolong, refine_time);
  }

  int dim() const override { return static_cast<int>(RtM_.rows()); }
  Vec<S> pair_H(S t, Side side) const override { return RtM_ * value(t, side); }
  Vec<S> pair_U(S t) const override { return RtK_ * value(t, Side::right); }
  Vec<S> pair_H_deriv(S t) const override {
    const auto p = locate(layout_.grid, t);
    return RtM_ * apply_terms(layout_.deriv_terms(p.slab, p.s), blocks_);
  }
  S norm2_H(S t, Side side) const override {
    const Vec<S> v = value(t, side);
    return v.dot(Mf_ * v);
  }
  S norm2_U(S t) const override {
    const Vec<S> v = value(t, Side::right);
    return v.dot(Kf_ * v);
  }
  int subdivisions() const override { return refine_; }
  std::string describe() const override {
    return "discrete-reference(" + layout_.describe() + ",N=" +
           std::to_string(layout_.grid.N) + ",dim=" + std::to_string(Mf_.rows()) + ")";
  }

 private:
  Vec<S> value(S t, Side side) const {
    return discrete_value(layout_, blocks_, t, side);
  }

 public:
  /// Value of a discrete function given by layout and blocks at time t.
  static Vec<S> discrete_value(const SchemeLayout<S>& l, const Mat<S>& blocks, S t,
                               Side side) {
    const auto p = locate(l.grid, t);
    if (p.node >= 0) return node_value(l, blocks, p.node, side);
    return apply_terms(l.value_terms(p.slab, p.s), blocks);
  }
  static Vec<S> node_value(const SchemeLayout<S>& l, const Mat<S>& blocks, int m,
                           Side side) {
    if (l.kind == SchemeKind::theta) return blocks.col(m);
    if (m == l.grid.N) return apply_terms(l.end_terms(), blocks);
    if (side == Side::left) return apply_terms(l.prev_end_terms(m), blocks);
    return blocks.col(l.slab_block(m, 0));
  }

 private:
  SchemeLayout<S> layout_;
  Mat<S> blocks_;
  Mat<S> Mf_, Kf_, RtM_, RtK_;
  int refine_;
};

namespace detail {

/// Integration plan for the error functionals: cells per slab and Gauss
/// points per cell.
template <class S>
struct ErrorQuadrature {
  GaussRule<S> rule;
  int cells = 1;
};

template <class S>
ErrorQuadrature<S> error_quadrature(const Target<S>& u) {
  return {gauss_legendre<S>(QuadraturePolicy::error_points), u.subdivisions()};
}

}  // namespace detail

/// Error components of the discrete function (layout, blocks) against u.
/// V' part: integral of ||<u'(t) - dhat w(t), .>_H||^2 in U_n'. V and H
/// parts: exact projection tails plus the in-span distance.
template <class S>
NormBundle<S> error_bundle(const Target<S>& u, const SchemeLayout<S>& l,
                           const Mat<S>& blocks, const SpaceTriple<S>& tr) {
  require_dim(u.dim(), tr.dim(), "error_bundle target");
  require_dim(blocks.rows(), tr.dim(), "error_bundle blocks");
  const auto& K = tr.gram_U();
  const auto& M = tr.gram_H();
  const auto quad = detail::error_quadrature(u);
  const S k = l.grid.k;
  const S h = k / quad.cells;

  auto err2_U = [&](S t, const Vec<S>& w) {
    const Vec<S> pu = u.pair_U(t);
    const Vec<S> a = tr.llt_U().solve(pu);
    const S tail = std::max(S(0), u.norm2_U(t) - pu.dot(a));
    const Vec<S> d = a - w;
    return tail + d.dot(K * d);
  };
  auto err2_H = [&](S t, Side side, const Vec<S>& w) {
    const Vec<S> ph = u.pair_H(t, side);
    const Vec<S> a = tr.llt_H().solve(ph);
    const S tail = std::max(S(0), u.norm2_H(t, side) - ph.dot(a));
    const Vec<S> d = a - w;
    return tail + d.dot(M * d);
  };

  NormBundle<S> b;
  S vp = 0, vv = 0;
  for (int m = 0; m < l.grid.N; ++m) {
    for (int c = 0; c < quad.cells; ++c) {
      for (int p = 0; p < quad.rule.size(); ++p) {
        const S s = (c + quad.rule.x[p]) / quad.cells;
        const S t = l.grid.node(m) + s * k;
        const S wt = quad.rule.w[p] * h;
        const Vec<S> g = u.pair_H_deriv(t) - M * apply_terms(l.deriv_terms(m, s), blocks);
        vp += wt * tr.llt_U().matrixL().solve(g).squaredNorm();
        vv += wt * err2_U(t, apply_terms(l.value_terms(m, s), blocks));
      }
    }
  }
  b.vprime_deriv = std::sqrt(vp);
  b.v_norm = std::sqrt(vv);

  const int ns = QuadraturePolicy::sup_samples_per_slab;
  S sup = 0;
  for (int m = 0; m <= l.grid.N; ++m) {
    const S t = l.grid.node(m);
    for (Side side : {Side::left, Side::right})
      sup = std::max(sup, err2_H(t, side, DiscreteTarget<S>::node_value(l, blocks, m, side)));
    if (m == l.grid.N) break;
    for (int r = 0; r < ns; ++r) {
      const S s = (S(r) + S(0.5)) / ns;
      sup = std::max(sup, err2_H(t + s * k, Side::right,
                                 apply_terms(l.value_terms(m, s), blocks)));
    }
  }
  b.sup_h = std::sqrt(sup);
  b.trace0 = std::sqrt(err2_H(S(0), Side::left, apply_terms(l.start_terms(), blocks)));
  b.traceT = std::sqrt(err2_H(l.grid.T, Side::left, apply_terms(l.end_terms(), blocks)));
  b.meta.sup_method = "sampled: nodes both sides + " + std::to_string(ns) +
                      " midpoints per slab";
  b.meta.time_points = quad.rule.size();
  b.meta.subdivisions = quad.cells;
  b.meta.sup_samples = ns;
  b.meta.reference = u.describe();
  b.finish();
  return b;
}

template <class S>
NormBundle<S> error_bundle(const Target<S>& u, const ThetaSolution<S>& sol,
                           const SpaceTriple<S>& tr) {
  return error_bundle(u, sol.layout(), sol.w, tr);
}

template <class S>
NormBundle<S> error_bundle(const Target<S>& u, const DgSolution<S>& sol,
                           const SpaceTriple<S>& tr) {
  return error_bundle(u, sol.layout(), sol.blocks, tr);
}

template <class S>
NormBundle<S> error_bundle(const ModalFunction<S>& u, const ThetaSolution<S>& sol,
                           const SpaceTriple<S>& tr) {
  return error_bundle(ModalTarget<S>(u), sol, tr);
}

template <class S>
NormBundle<S> error_bundle(const ModalFunction<S>& u, const DgSolution<S>& sol,
                           const SpaceTriple<S>& tr) {
  return error_bundle(ModalTarget<S>(u), sol, tr);
}

/// Right-hand side g of the normal equations G_X x = g for the best
/// approximation of u in the surrogate quadruple norm.
template <class S>
Vec<S> surrogate_moments(const Target<S>& u, const SchemeLayout<S>& l,
                         const SpaceTriple<S>& tr) {
  const int n = tr.dim();
  const auto quad = detail::error_quadrature(u);
  const S k = l.grid.k;
  const S h = k / quad.cells;
  const Mat<S> MKinv = tr.gram_H() * tr.llt_U().solve(Mat<S>::Identity(n, n));
  Mat<S> g = Mat<S>::Zero(n, l.nblocks());
  for (int m = 0; m < l.grid.N; ++m) {
    for (int c = 0; c < quad.cells; ++c) {
      for (int p = 0; p < quad.rule.size(); ++p) {
        const S s = (c + quad.rule.x[p]) / quad.cells;
        const S t = l.grid.node(m) + s * k;
        const S wt = quad.rule.w[p] * h;
        const Vec<S> rd = MKinv * u.pair_H_deriv(t);
        const Vec<S> pu = u.pair_U(t);
        for (const auto& term : l.deriv_terms(m, s)) g.col(term.block) += wt * term.weight * rd;
        for (const auto& term : l.value_terms(m, s)) g.col(term.block) += wt * term.weight * pu;
      }
    }
  }
  const Vec<S> p0 = u.pair_H(S(0), Side::left);
  const Vec<S> pT = u.pair_H(l.grid.T, Side::left);
  for (const auto& term : l.start_terms()) g.col(term.block) += term.weight * p0;
  for (const auto& term : l.end_terms()) g.col(term.block) += term.weight * pT;
  return Eigen::Map<const Vec<S>>(g.data(), g.size());
}

}  // namespace stlab
