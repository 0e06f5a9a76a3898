#pragma once

#include "stlab/grid.hpp"
#include "stlab/linsolve.hpp"
#include "stlab/quadrature.hpp"
#include "stlab/triple.hpp"

#include <functional>
#include <vector>

namespace stlab {

/// Right-hand side f(t) as its pairing vector <f(t), phi_i>. Empty means 0.
template <class S = double>
using LoadFn = std::function<Vec<S>(S)>;

/// Slab averages A^{(m)} = (1/k) int a(t) dt and f^{(m)} = (1/k) int f dt.
template <class S = double>
struct SlabData {
  std::vector<Mat<S>> A;
  std::vector<Vec<S>> f;
  int quadrature_points = QuadraturePolicy::slab_average_points;
};

template <class S>
SlabData<S> average_form(const FormSpec<S>& form, const SpaceTriple<S>& triple,
                         const TimeGrid<S>& grid, const LoadFn<S>& f = {}) {
  const int n = triple.dim();
  if (form.A.rows() != n) throw DimensionError("average_form: form/triple size");
  SlabData<S> d;
  const auto g = gauss_legendre<S>(d.quadrature_points);
  d.A.reserve(grid.N);
  d.f.reserve(grid.N);
  for (int m = 0; m < grid.N; ++m) {
    S cbar = 1;
    if (form.time_dependent()) {
      cbar = 0;
      for (int p = 0; p < g.size(); ++p) cbar += g.w[p] * form.c(grid.node(m) + g.x[p] * grid.k);
    }
    if (!std::isfinite(double(cbar)))
      throw NumericalError("average_form: non-finite coefficient average");
    d.A.push_back(form.matrix_for(cbar));
    Vec<S> fm = Vec<S>::Zero(n);
    if (f) {
      for (int p = 0; p < g.size(); ++p) {
        const Vec<S> v = f(grid.node(m) + g.x[p] * grid.k);
        require_dim(v.size(), n, "average_form load");
        fm += g.w[p] * v;
      }
      if (!fm.allFinite()) throw NumericalError("average_form: non-finite load");
    }
    d.f.push_back(std::move(fm));
  }
  return d;
}

/// Nodal vectors w^0..w^N as the columns of w.
template <class S = double>
struct ThetaSolution {
  S theta = 1;
  TimeGrid<S> grid;
  Mat<S> w;

  int dim() const { return static_cast<int>(w.rows()); }
  SchemeLayout<S> layout() const {
    return SchemeLayout<S>::theta_layout(theta, grid, dim());
  }
  /// Blocks stacked into one coefficient vector.
  Vec<S> flat() const { return Eigen::Map<const Vec<S>>(w.data(), w.size()); }
  static ThetaSolution from_flat(S theta, const TimeGrid<S>& g, int dim,
                                 const Vec<S>& x) {
    ThetaSolution s;
    s.theta = theta;
    s.grid = g;
    s.w = Eigen::Map<const Mat<S>>(x.data(), dim, g.N + 1);
    return s;
  }
  /// theta w^{m+1} + (1 - theta) w^m
  Vec<S> plateau(int m) const { return theta * w.col(m + 1) + (1 - theta) * w.col(m); }
};

/// Global block system: step rows multiplied by k, then the coupling row.
template <class S = double>
struct SchemeSystem {
  SchemeLayout<S> layout;
  SparseMat<S> B;
  Vec<S> rhs;
};

template <class S>
SchemeSystem<S> assemble_theta_system(const SlabData<S>& slabs, S theta,
                                      const ContractionMap<S>& phi,
                                      const Vec<S>& xi0,
                                      const SpaceTriple<S>& triple,
                                      const TimeGrid<S>& grid) {
  const int n = triple.dim();
  const int N = grid.N;
  if (static_cast<int>(slabs.A.size()) != N || static_cast<int>(slabs.f.size()) != N)
    throw DimensionError("assemble_theta_system: slab data does not match grid");
  require_dim(xi0.size(), n, "assemble_theta_system xi0");
  if (phi.pairing_H.rows() != n) throw DimensionError("assemble_theta_system: Phi size");
  SchemeSystem<S> sys;
  sys.layout = SchemeLayout<S>::theta_layout(theta, grid, n);
  const int size = (N + 1) * n;
  const S k = grid.k;
  const Mat<S>& M = triple.gram_H();
  std::vector<Eigen::Triplet<S>> trip;
  sys.rhs = Vec<S>::Zero(size);
  for (int m = 0; m < N; ++m) {
    add_block<S>(trip, m * n, m * n, Mat<S>(-M + k * (1 - theta) * slabs.A[m]));
    add_block<S>(trip, m * n, (m + 1) * n, Mat<S>(M + k * theta * slabs.A[m]));
    sys.rhs.segment(m * n, n) = k * slabs.f[m];
  }
  add_block<S>(trip, N * n, 0, M);
  add_block<S>(trip, N * n, N * n, Mat<S>(-phi.pairing_H));
  sys.rhs.segment(N * n, n) = xi0;
  sys.B.resize(size, size);
  sys.B.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

/// ||B x - rhs|| / (||B|| ||x|| + ||rhs||) with the Frobenius norm of B.
template <class S>
S relative_residual(const SchemeSystem<S>& sys, const Vec<S>& x) {
  const S r = (sys.B * x - sys.rhs).norm();
  const S scale = sys.B.norm() * x.norm() + sys.rhs.norm();
  return scale > 0 ? r / scale : r;
}

/// Global solve of the coupled system regardless of Phi.
template <class S>
ThetaSolution<S> solve_theta_block(const SlabData<S>& slabs, S theta,
                                   const ContractionMap<S>& phi,
                                   const Vec<S>& xi0,
                                   const SpaceTriple<S>& triple,
                                   const TimeGrid<S>& grid) {
  const auto sys = assemble_theta_system(slabs, theta, phi, xi0, triple, grid);
  const Vec<S> x = solve_certified<S>(sys.B, sys.rhs, "solve_theta");
  return ThetaSolution<S>::from_flat(theta, grid, triple.dim(), x);
}

/// Forward marching for Phi = 0.
template <class S>
ThetaSolution<S> march_theta(const SlabData<S>& slabs, S theta,
                             const Vec<S>& xi0, const SpaceTriple<S>& triple,
                             const TimeGrid<S>& grid) {
  const int n = triple.dim();
  const S k = grid.k;
  const Mat<S>& M = triple.gram_H();
  ThetaSolution<S> sol;
  sol.theta = theta;
  sol.grid = grid;
  sol.w.resize(n, grid.N + 1);
  sol.w.col(0) = triple.llt_H().solve(xi0);
  for (int m = 0; m < grid.N; ++m) {
    const auto lu = factor_step<S>(Mat<S>(M + k * theta * slabs.A[m]), "march_theta");
    const Vec<S> r = (M - k * (1 - theta) * slabs.A[m]) * sol.w.col(m) + k * slabs.f[m];
    sol.w.col(m + 1) = lu.solve(r);
  }
  return sol;
}

/// Solve the theta scheme; marching for Phi = 0, global solve otherwise.
/// The residual of the global system is certified in both cases.
template <class S>
ThetaSolution<S> solve_theta(const SlabData<S>& slabs, S theta,
                             const ContractionMap<S>& phi, const Vec<S>& xi0,
                             const SpaceTriple<S>& triple,
                             const TimeGrid<S>& grid) {
  if (!(theta >= 0 && theta <= 1)) throw DomainError("solve_theta: theta outside [0, 1]");
  if (!phi.is_zero()) return solve_theta_block(slabs, theta, phi, xi0, triple, grid);
  auto sol = march_theta(slabs, theta, xi0, triple, grid);
  const auto sys = assemble_theta_system(slabs, theta, phi, xi0, triple, grid);
  const S res = relative_residual(sys, sol.flat());
  if (!(res <= S(1e-9))) {
    throw NumericalError("solve_theta: marching residual " + std::to_string(double(res)));
  }
  return sol;
}

/// Reconstructed w(t): nodal value on nodes, plateau value inside slabs.
template <class S>
Vec<S> reconstruct(const ThetaSolution<S>& sol, S t) {
  const auto p = locate(sol.grid, t);
  if (p.node >= 0) return sol.w.col(p.node);
  return sol.plateau(p.slab);
}

/// d_m = (w^{m+1} - w^m)/k as the columns of a dim x N matrix.
template <class S>
Mat<S> discrete_derivative(const ThetaSolution<S>& sol) {
  const int N = sol.grid.N;
  return (sol.w.rightCols(N) - sol.w.leftCols(N)) / sol.grid.k;
}

}  // namespace stlab
