#pragma once

#include "stlab/theta_scheme.hpp"

#include <vector>

namespace stlab {

inline constexpr int kMaxDgDegree = 6;

/// dG(q) solution: the value w0 at t = 0 and per-slab coefficients of
/// w(t) = sum_i s^i w_i^{(m)}, s = (t - m k)/k, stored as the columns of
/// `blocks` in SchemeLayout order.
template <class S = double>
struct DgSolution {
  int q = 0;
  TimeGrid<S> grid;
  Mat<S> blocks;

  int dim() const { return static_cast<int>(blocks.rows()); }
  SchemeLayout<S> layout() const {
    return SchemeLayout<S>::dg_layout(q, grid, dim());
  }
  Vec<S> flat() const {
    return Eigen::Map<const Vec<S>>(blocks.data(), blocks.size());
  }
  static DgSolution from_flat(int q, const TimeGrid<S>& g, int dim,
                              const Vec<S>& x) {
    DgSolution s;
    s.q = q;
    s.grid = g;
    s.blocks = Eigen::Map<const Mat<S>>(x.data(), dim, 1 + g.N * (q + 1));
    return s;
  }
  static DgSolution zeros(int q, const TimeGrid<S>& g, int dim) {
    DgSolution s;
    s.q = q;
    s.grid = g;
    s.blocks = Mat<S>::Zero(dim, 1 + g.N * (q + 1));
    return s;
  }

  auto w0() const { return blocks.col(0); }
  auto w0() { return blocks.col(0); }
  auto coeff(int m, int i) const { return blocks.col(1 + m * (q + 1) + i); }
  auto coeff(int m, int i) { return blocks.col(1 + m * (q + 1) + i); }
  /// dim x (q+1) coefficients of slab m.
  auto slab(int m) const { return blocks.middleCols(1 + m * (q + 1), q + 1); }

  /// Value at the right end of slab m.
  Vec<S> end_value(int m) const { return slab(m).rowwise().sum(); }
  /// Value at the left node of slab m seen from the left.
  Vec<S> prev_value(int m) const { return m == 0 ? Vec<S>(w0()) : end_value(m - 1); }
  /// w_0^{(m)} - w((m-1)k)
  Vec<S> jump(int m) const { return Vec<S>(coeff(m, 0)) - prev_value(m); }
  Vec<S> eval(int m, S s) const {
    Vec<S> r = Vec<S>::Zero(dim());
    for (int i = q; i >= 0; --i) r = r * s + coeff(m, i);
    return r;
  }
};

template <class S = double>
struct DgSystem : SchemeSystem<S> {
  int q = 0;
  bool phi_zero = false;
  std::vector<Mat<S>> slab_matrix;  // (q+1)dim square diagonal blocks
  Mat<S> gram_H;
};

/// Exact time-derivative table int_0^1 (d/ds s^i) s^j ds = i/(i+j).
template <class S = double>
Mat<S> dg_time_derivative_table(int q) {
  Mat<S> d = Mat<S>::Zero(q + 1, q + 1);
  for (int j = 0; j <= q; ++j)
    for (int i = 1; i <= q; ++i) d(j, i) = S(i) / S(i + j);
  return d;
}

template <class S>
DgSystem<S> assemble_dg_system(const FormSpec<S>& form, int q,
                               const ContractionMap<S>& phi, const Vec<S>& xi0,
                               const LoadFn<S>& f, const SpaceTriple<S>& triple,
                               const TimeGrid<S>& grid, const PsiBasis<S>& psi) {
  if (q < 0 || q > kMaxDgDegree)
    throw DomainError("assemble_dg_system: q outside [0, 6]");
  if (psi.q != q) throw DimensionError("assemble_dg_system: psi degree mismatch");
  const int n = triple.dim();
  require_dim(xi0.size(), n, "assemble_dg_system xi0");
  if (form.A.rows() != n || phi.pairing_H.rows() != n)
    throw DimensionError("assemble_dg_system: operator sizes");
  const int N = grid.N;
  const int nb = q + 1;
  const S k = grid.k;
  const Mat<S>& M = triple.gram_H();
  const auto g = gauss_legendre<S>(std::max(q + 2, int(QuadraturePolicy::slab_average_points)));
  const Mat<S> D = dg_time_derivative_table<S>(q);

  DgSystem<S> sys;
  sys.layout = SchemeLayout<S>::dg_layout(q, grid, n);
  sys.q = q;
  sys.phi_zero = phi.is_zero();
  sys.gram_H = M;
  const int size = sys.layout.size();
  sys.rhs = Vec<S>::Zero(size);
  std::vector<Eigen::Triplet<S>> trip;

  for (int m = 0; m < N; ++m) {
    // moments int_0^1 c(t(s)) s^p ds, p = 0..2q
    std::vector<S> mom(2 * q + 1, 0);
    for (int p = 0; p <= 2 * q; ++p) {
      if (!form.time_dependent()) {
        mom[p] = S(1) / S(p + 1);
        continue;
      }
      for (int r = 0; r < g.size(); ++r)
        mom[p] += g.w[r] * form.c(grid.node(m) + g.x[r] * k) * std::pow(g.x[r], p);
    }
    Mat<S> blk = Mat<S>::Zero(nb * n, nb * n);
    for (int j = 0; j < nb; ++j) {
      for (int i = 0; i < nb; ++i) {
        Mat<S> b = D(j, i) * M + k * (mom[i + j] * form.A + form.A0 / S(i + j + 1));
        if (j == 0 && i == 0) b += M;
        blk.block(j * n, i * n, n, n) = b;
      }
    }
    const int row0 = m * nb * n;
    const int col0 = sys.layout.slab_block(m, 0) * n;
    add_block<S>(trip, row0, col0, blk);
    // jump: -M w((m-1)k) in the j = 0 row
    for (const auto& t : sys.layout.prev_end_terms(m))
      add_block<S>(trip, row0, t.block * n, Mat<S>(-t.weight * M));
    if (f) {
      for (int r = 0; r < g.size(); ++r) {
        const Vec<S> fv = f(grid.node(m) + g.x[r] * k);
        require_dim(fv.size(), n, "assemble_dg_system load");
        S p = 1;
        for (int j = 0; j < nb; ++j, p *= g.x[r])
          sys.rhs.segment(row0 + j * n, n) += k * g.w[r] * p * fv;
      }
    }
    sys.slab_matrix.push_back(std::move(blk));
  }
  const int crow = N * nb * n;
  add_block<S>(trip, crow, 0, M);
  for (const auto& t : sys.layout.end_terms())
    add_block<S>(trip, crow, t.block * n, Mat<S>(-t.weight * phi.pairing_H));
  sys.rhs.segment(crow, n) = xi0;
  sys.B.resize(size, size);
  sys.B.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

/// Global solve of the dG system.
template <class S>
DgSolution<S> solve_dg_global(const DgSystem<S>& sys) {
  const Vec<S> x = solve_certified<S>(sys.B, sys.rhs, "solve_dg");
  return DgSolution<S>::from_flat(sys.q, sys.layout.grid, sys.layout.dim, x);
}

/// Slab-by-slab marching, valid when Phi = 0.
template <class S>
DgSolution<S> march_dg(const DgSystem<S>& sys) {
  if (!sys.phi_zero) throw DomainError("march_dg: requires Phi = 0");
  const int n = sys.layout.dim;
  const int nb = sys.q + 1;
  const int N = sys.layout.grid.N;
  auto sol = DgSolution<S>::zeros(sys.q, sys.layout.grid, n);
  const Eigen::LLT<Mat<S>> llt(sys.gram_H);
  sol.w0() = llt.solve(Vec<S>(sys.rhs.segment(N * nb * n, n)));
  for (int m = 0; m < N; ++m) {
    Vec<S> r = sys.rhs.segment(m * nb * n, nb * n);
    r.head(n) += sys.gram_H * sol.prev_value(m);
    const auto lu = factor_step<S>(sys.slab_matrix[m], "march_dg");
    const Vec<S> x = lu.solve(r);
    for (int i = 0; i < nb; ++i) sol.coeff(m, i) = x.segment(i * n, n);
  }
  return sol;
}

template <class S>
S relative_residual(const DgSystem<S>& sys, const DgSolution<S>& sol) {
  return relative_residual(static_cast<const SchemeSystem<S>&>(sys), sol.flat());
}

/// Solve the dG system; marching for Phi = 0 with a certified global
/// residual, the global solve otherwise.
template <class S>
DgSolution<S> solve_dg(const DgSystem<S>& sys) {
  if (!sys.phi_zero) return solve_dg_global(sys);
  auto sol = march_dg(sys);
  const S res = relative_residual(sys, sol);
  if (!(res <= S(1e-9)))
    throw NumericalError("solve_dg: marching residual " + std::to_string(double(res)));
  return sol;
}

/// Coefficients c_p^{(m)} of the jump-corrected derivative on each slab:
/// broken derivative plus (1/k) psi_0(s) (w_0^{(m)} - w((m-1)k)).
template <class S>
std::vector<Mat<S>> corrected_derivative(const DgSolution<S>& sol,
                                         const PsiBasis<S>& psi) {
  if (psi.q != sol.q) throw DimensionError("corrected_derivative: psi degree");
  const int q = sol.q;
  const S k = sol.grid.k;
  std::vector<Mat<S>> out;
  out.reserve(sol.grid.N);
  for (int m = 0; m < sol.grid.N; ++m) {
    Mat<S> c = Mat<S>::Zero(sol.dim(), q + 1);
    for (int i = 1; i <= q; ++i) c.col(i - 1) += S(i) * sol.coeff(m, i) / k;
    const Vec<S> j = sol.jump(m);
    for (int p = 0; p <= q; ++p) c.col(p) += psi.coeffs(0, p) / k * j;
    out.push_back(std::move(c));
  }
  return out;
}

enum class Side { left, right };

/// w(t); at a node, `left` takes the limit from the previous slab (w0 at
/// t = 0) and `right` the next slab's left value (the end value at t = T).
template <class S>
Vec<S> dg_reconstruct(const DgSolution<S>& sol, S t, Side side = Side::right) {
  const auto p = locate(sol.grid, t);
  if (p.node >= 0) {
    const int m = p.node;
    if (side == Side::left) return m == 0 ? Vec<S>(sol.w0()) : sol.end_value(m - 1);
    if (m == sol.grid.N) return sol.end_value(m - 1);
    return sol.coeff(m, 0);
  }
  return sol.eval(p.slab, p.s);
}

}  // namespace stlab
