#pragma once

#include "stlab/norms.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <optional>
#include <random>
#include <string>

namespace stlab {

template <class S = double>
struct SchemeSpec {
  SchemeKind kind = SchemeKind::theta;
  S theta = 1;
  int q = 0;

  static SchemeSpec theta_scheme(S th) { return {SchemeKind::theta, th, 0}; }
  static SchemeSpec dg(int q) { return {SchemeKind::dg, S(1), q}; }
  SchemeLayout<S> layout(const TimeGrid<S>& g, int dim) const {
    return kind == SchemeKind::theta ? SchemeLayout<S>::theta_layout(theta, g, dim)
                                     : SchemeLayout<S>::dg_layout(q, g, dim);
  }
  std::string describe() const {
    return kind == SchemeKind::theta ? "theta(" + std::to_string(double(theta)) + ")"
                                     : "dg(" + std::to_string(q) + ")";
  }
};

template <class S = double>
struct BMatrix {
  SchemeLayout<S> layout;
  Mat<S> B;  // rows: Y basis (slab test functions, then the coupling block)
};

/// b(x, y) on W_n x (V_n x U_n); identical to the scheme system matrix.
template <class S>
BMatrix<S> assemble_b_matrix(const SchemeSpec<S>& spec, const FormSpec<S>& form,
                             const ContractionMap<S>& phi, const SpaceTriple<S>& tr,
                             const TimeGrid<S>& grid) {
  const Vec<S> zero = Vec<S>::Zero(tr.dim());
  BMatrix<S> r;
  if (spec.kind == SchemeKind::theta) {
    const auto slabs = average_form(form, tr, grid);
    const auto sys = assemble_theta_system(slabs, spec.theta, phi, zero, tr, grid);
    r.layout = sys.layout;
    r.B = Mat<S>(sys.B);
  } else {
    const auto sys = assemble_dg_system(form, spec.q, phi, zero, LoadFn<S>{}, tr, grid,
                                        psi_basis<S>(spec.q));
    r.layout = sys.layout;
    r.B = Mat<S>(sys.B);
  }
  if (r.B.rows() != r.B.cols() || r.B.rows() != r.layout.size())
    throw DimensionError("assemble_b_matrix: dim X_n != dim Y_n");
  return r;
}

/// Gram matrix of Y_n = V_n x U_n in the V x H norm.
template <class S>
Mat<S> gram_Y(const SchemeLayout<S>& l, const SpaceTriple<S>& tr) {
  const int n = tr.dim();
  const int nb = l.kind == SchemeKind::theta ? 1 : l.q + 1;
  const Mat<S> A = l.kind == SchemeKind::theta ? Mat<S>::Ones(1, 1) : hilbert_gram<S>(l.q);
  Mat<S> G = Mat<S>::Zero(l.size(), l.size());
  for (int m = 0; m < l.grid.N; ++m)
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j)
        G.block((m * nb + i) * n, (m * nb + j) * n, n, n) = l.grid.k * A(i, j) * tr.gram_U();
  const int c = l.grid.N * nb * n;
  G.block(c, c, n, n) = tr.gram_H();
  return G;
}

/// Quadratic form ||dhat w||_{V'}^2 + ||w||_V^2 + ||w(0)||_H^2 + ||w(T)||_H^2
/// on W_n coefficients, assembled from the layout evaluators with a Gauss
/// rule exact for the polynomial integrands.
template <class S>
Mat<S> gram_X_surrogate(const SchemeLayout<S>& l, const SpaceTriple<S>& tr) {
  const int n = tr.dim();
  const Mat<S>& K = tr.gram_U();
  const Mat<S>& M = tr.gram_H();
  const Mat<S> MKM = M * tr.llt_U().solve(M);
  const auto rule = gauss_legendre<S>(l.q + 2);
  Mat<S> G = Mat<S>::Zero(l.size(), l.size());
  auto add = [&](const Terms<S>& a, const Terms<S>& b, S w, const Mat<S>& blk) {
    for (const auto& ta : a)
      for (const auto& tb : b)
        G.block(ta.block * n, tb.block * n, n, n) += (w * ta.weight * tb.weight) * blk;
  };
  for (int m = 0; m < l.grid.N; ++m) {
    for (int p = 0; p < rule.size(); ++p) {
      const S w = rule.w[p] * l.grid.k;
      const auto d = l.deriv_terms(m, rule.x[p]);
      const auto v = l.value_terms(m, rule.x[p]);
      add(d, d, w, MKM);
      add(v, v, w, K);
    }
  }
  add(l.start_terms(), l.start_terms(), 1, M);
  add(l.end_terms(), l.end_terms(), 1, M);
  const Mat<S> sym = (G + G.transpose()) / 2;
  Eigen::LLT<Mat<S>> llt(sym);
  if (llt.info() != Eigen::Success)
    throw NumericalError("gram_X_surrogate: not positive definite");
  return sym;
}

template <class S = double>
struct InfSup {
  S beta = 0;
  S beta_dual = 0;
};

/// beta = sqrt(lambda_min(B^T G_Y^{-1} B, G_X)); the dual swaps the roles.
/// Both are computed on C = L_Y^{-1} B L_X^{-T} as the smallest eigenvalue
/// of C^T C and of C C^T; near-singular cases fall back to an SVD of C,
/// since squaring loses the small singular values.
template <class S>
InfSup<S> infsup_constant(const Mat<S>& B, const Mat<S>& GX, const Mat<S>& GY) {
  if (B.rows() != B.cols() || GX.rows() != B.cols() || GY.rows() != B.rows())
    throw DimensionError("infsup_constant: shapes");
  Eigen::LLT<Mat<S>> lx(GX), ly(GY);
  if (lx.info() != Eigen::Success || ly.info() != Eigen::Success)
    throw NumericalError("infsup_constant: Gram matrix not positive definite");
  const Mat<S> t = ly.matrixL().solve(B);
  const Mat<S> C = lx.matrixL().solve(t.transpose()).transpose();
  auto smallest = [](const Mat<S>& a, S& largest) {
    Eigen::SelfAdjointEigenSolver<Mat<S>> es(a, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("infsup_constant: eigensolver failed");
    largest = es.eigenvalues()(a.rows() - 1);
    return es.eigenvalues()(0);
  };
  S lmax = 0, lmax_d = 0;
  Mat<S> ctc(C.cols(), C.cols());
  ctc.noalias() = C.transpose() * C;
  const S lp = smallest(ctc, lmax);
  ctc.noalias() = C * C.transpose();
  const S ld = smallest(ctc, lmax_d);
  InfSup<S> r;
  if (lp < S(1e-10) * lmax || ld < S(1e-10) * lmax_d) {
    Eigen::JacobiSVD<Mat<S>> sv(C);
    Eigen::JacobiSVD<Mat<S>> svt(Mat<S>(C.transpose()));
    r.beta = sv.singularValues()(C.cols() - 1);
    r.beta_dual = svt.singularValues()(C.cols() - 1);
    return r;
  }
  r.beta = std::sqrt(lp);
  r.beta_dual = std::sqrt(ld);
  return r;
}

/// k <= alpha^2 / (24 mu^2 M^3 (1/2 - theta)) for theta < 1/2.
template <class S>
std::optional<S> cfl_threshold(S alpha, S M, S mu, S theta) {
  if (!(theta >= 0 && theta <= 1)) throw DomainError("cfl_threshold: theta outside [0, 1]");
  if (theta >= S(0.5)) return std::nullopt;
  return alpha * alpha / (S(24) * mu * mu * M * M * M * (S(0.5) - theta));
}

/// ||B x||_{G_Y^{-1}} / ||x||_{G_X}: an upper bound for beta.
template <class S>
S witness_ratio(const Mat<S>& B, const Mat<S>& GX, const Mat<S>& GY, const Vec<S>& x) {
  const Vec<S> bx = B * x;
  Eigen::LLT<Mat<S>> ly(GY);
  return std::sqrt(bx.dot(ly.solve(bx)) / x.dot(GX * x));
}

/// Alternating test function w^m = (-1)^m k u, u the mu_n-extremal vector.
template <class S>
Vec<S> alternating_witness(const SchemeLayout<S>& l, const SpaceTriple<S>& tr) {
  if (l.kind != SchemeKind::theta) throw DomainError("alternating_witness: theta layout only");
  const Vec<S> u = extremal_vector(tr);
  Mat<S> w(tr.dim(), l.grid.N + 1);
  for (int m = 0; m <= l.grid.N; ++m) w.col(m) = (m % 2 == 0 ? 1 : -1) * l.grid.k * u;
  return Eigen::Map<const Vec<S>>(w.data(), w.size());
}

template <class S = double>
struct BnbReport {
  S beta_hat = 0;
  S beta_hat_dual = 0;
  S mu_n = 0;
  std::optional<S> cfl_threshold;
  S cfl_margin = std::numeric_limits<S>::quiet_NaN();  // k*/k - 1
  std::optional<S> witness_bound;
  std::string norm = "surrogate-quadruple";
  std::string scheme;
  std::string triple;
  std::string phi;
  int N = 0;
  int dim = 0;
  S T = 1;
  S k = 1;
};

template <class S>
BnbReport<S> bnb_report(const SchemeSpec<S>& spec, const FormSpec<S>& form,
                        const ContractionMap<S>& phi, const SpaceTriple<S>& tr,
                        const TimeGrid<S>& grid, bool with_witness = false) {
  const auto b = assemble_b_matrix(spec, form, phi, tr, grid);
  const Mat<S> GX = gram_X_surrogate(b.layout, tr);
  const Mat<S> GY = gram_Y(b.layout, tr);
  const auto is = infsup_constant(b.B, GX, GY);
  BnbReport<S> r;
  r.beta_hat = is.beta;
  r.beta_hat_dual = is.beta_dual;
  r.mu_n = inverse_inequality_constant(tr);
  if (spec.kind == SchemeKind::theta) {
    r.cfl_threshold = cfl_threshold(form.alpha, form.M, r.mu_n, spec.theta);
    if (r.cfl_threshold) r.cfl_margin = *r.cfl_threshold / grid.k - 1;
    if (with_witness)
      r.witness_bound = witness_ratio(b.B, GX, GY, alternating_witness(b.layout, tr));
  }
  r.scheme = spec.describe();
  r.triple = tr.label();
  r.phi = phi.describe();
  r.N = grid.N;
  r.dim = tr.dim();
  r.T = grid.T;
  r.k = grid.k;
  return r;
}

// ------------------------------------------------- inequality checkers

template <class S = double>
struct InequalityReport {
  long samples = 0;
  long violations = 0;
  S worst_slack = std::numeric_limits<S>::infinity();  // (LHS - RHS) / scale
  Vec<S> witness_a;
  Vec<S> witness_b;
};

/// Certified (alpha, M) of A in the metric G: alpha = lambda_min of the
/// symmetric part, M = max(1, ||A||_G).
template <class S>
std::pair<S, S> operator_constants(const Mat<S>& A, const Mat<S>& G) {
  const Mat<S> GA = G * A;
  const Mat<S> sym = (GA + GA.transpose()) / 2;
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat<S>> es(sym, G, Eigen::EigenvaluesOnly);
  const Mat<S> ata = A.transpose() * G * A;
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat<S>> en(ata, G, Eigen::EigenvaluesOnly);
  const S alpha = es.eigenvalues()(0);
  const S M = std::max(S(1), std::sqrt(en.eigenvalues()(A.rows() - 1)));
  return {alpha, M};
}

/// ||w + A v||^2 >= 2 alpha <w, v> + (1/3)(alpha/M)^3 (||w||^2 + ||v||^2)
/// in the inner product <x, y> = x^T G y. Requires 0 < alpha <= M and M >= 1.
template <class S, class Rng>
InequalityReport<S> check_zigoto(const Mat<S>& A, const Mat<S>& G, S alpha, S M,
                                 long samples, Rng& rng) {
  if (!(alpha > 0) || !(M >= 1) || alpha > M)
    throw DomainError("check_zigoto: need 0 < alpha <= M and M >= 1");
  const int n = static_cast<int>(A.rows());
  std::normal_distribution<S> nd(0, 1);
  std::uniform_real_distribution<S> ud(-2, 2);
  InequalityReport<S> r;
  auto rnd = [&] {
    Vec<S> x(n);
    for (int i = 0; i < n; ++i) x(i) = nd(rng);
    return x;
  };
  const S c = std::pow(alpha / M, 3) / 3;
  for (long s = 0; s < samples; ++s) {
    const Vec<S> v = rnd();
    // mix in -A v to probe the near-cancelling direction
    const Vec<S> w = ud(rng) * (A * v) + S(0.3) * ud(rng) * rnd();
    const Vec<S> z = w + A * v;
    const S nw = w.dot(G * w), nv = v.dot(G * v);
    const S lhs = z.dot(G * z);
    const S rhs = 2 * alpha * w.dot(G * v) + c * (nw + nv);
    const S scale = nw + nv;
    const S slack = (lhs - rhs) / scale;
    ++r.samples;
    if (lhs < rhs - S(1e-12) * scale) ++r.violations;
    if (slack < r.worst_slack) {
      r.worst_slack = slack;
      r.witness_a = w;
      r.witness_b = v;
    }
  }
  return r;
}

/// a||w||^2 - b||v||^2 + (9a^2/gamma)||v - Phi w||^2 >= (gamma/3)(||w||^2+||v||^2)
/// with gamma = a - b ||Phi||^2, Euclidean H.
template <class S, class Rng>
InequalityReport<S> check_peterpaul2(const Mat<S>& Phi, S phi_norm, S a, S b,
                                     long samples, Rng& rng) {
  const S gamma = a - b * phi_norm * phi_norm;
  if (!(a > 0) || b < 0 || b > a || !(gamma > 0) || phi_norm > 1 + S(1e-12))
    throw DomainError("check_peterpaul2: parameter constraints violated");
  const int n = static_cast<int>(Phi.rows());
  std::normal_distribution<S> nd(0, 1);
  std::uniform_real_distribution<S> ud(-2, 2);
  InequalityReport<S> r;
  auto rnd = [&] {
    Vec<S> x(n);
    for (int i = 0; i < n; ++i) x(i) = nd(rng);
    return x;
  };
  for (long s = 0; s < samples; ++s) {
    const Vec<S> w = rnd();
    const Vec<S> v = ud(rng) * (Phi * w) + S(0.3) * ud(rng) * rnd();
    const S nw = w.squaredNorm(), nv = v.squaredNorm();
    const S lhs = a * nw - b * nv + 9 * a * a / gamma * (v - Phi * w).squaredNorm();
    const S rhs = gamma / 3 * (nw + nv);
    const S slack = (lhs - rhs) / (nw + nv);
    ++r.samples;
    if (lhs < rhs - S(1e-12) * (nw + nv)) ++r.violations;
    if (slack < r.worst_slack) {
      r.worst_slack = slack;
      r.witness_a = w;
      r.witness_b = v;
    }
  }
  return r;
}

/// <x1, x2> + (alpha^2/(12 M^3))(||x2||_V^2 + ||x1||_{V'}^2)
///   >= mu ||x4||^2 - nu ||x3||^2
/// on random elements x = (dhat w, w, w(0), w(T)) of W_n.
template <class S, class Rng>
InequalityReport<S> check_condlim(const SchemeLayout<S>& l, const SpaceTriple<S>& tr,
                                  S alpha, S M, S mu, S nu, long samples, Rng& rng) {
  std::normal_distribution<S> nd(0, 1);
  InequalityReport<S> r;
  const S c = alpha * alpha / (12 * M * M * M);
  const auto psi = psi_basis<S>(l.kind == SchemeKind::dg ? l.q : 0);
  for (long s = 0; s < samples; ++s) {
    Mat<S> blocks(l.dim, l.nblocks());
    for (Eigen::Index i = 0; i < blocks.size(); ++i) blocks.data()[i] = nd(rng);
    S x12, n1, n2, n3, n4;
    if (l.kind == SchemeKind::theta) {
      ThetaSolution<S> w{l.theta, l.grid, blocks};
      x12 = derivative_pairing(w, tr);
      n1 = hat_derivative_vprime_norm(w, tr);
      n2 = v_norm(w, tr);
      n3 = tr.norm2_H(w.w.col(0));
      n4 = tr.norm2_H(w.w.col(l.grid.N));
    } else {
      DgSolution<S> w{l.q, l.grid, blocks};
      x12 = derivative_pairing(w, tr, psi);
      n1 = hat_derivative_vprime_norm(w, tr, psi);
      n2 = v_norm(w, tr);
      n3 = tr.norm2_H(Vec<S>(w.w0()));
      n4 = tr.norm2_H(w.end_value(l.grid.N - 1));
    }
    const S lhs = x12 + c * (n2 * n2 + n1 * n1);
    const S rhs = mu * n4 - nu * n3;
    const S scale = n1 * n1 + n2 * n2 + n3 + n4;
    const S slack = (lhs - rhs) / scale;
    ++r.samples;
    if (lhs < rhs - S(1e-12) * scale) ++r.violations;
    if (slack < r.worst_slack) {
      r.worst_slack = slack;
      r.witness_a = Eigen::Map<const Vec<S>>(blocks.data(), blocks.size());
    }
  }
  return r;
}

}  // namespace stlab
