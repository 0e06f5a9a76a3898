#pragma once

#include "stlab/common.hpp"
#include "stlab/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stlab {

enum class TripleKind { spectral_diagonal, p1_fem_dirichlet };

inline const char* to_string(TripleKind k) {
  return k == TripleKind::spectral_diagonal ? "spectral-diagonal"
                                            : "p1-fem-dirichlet";
}

/// Discrete Gelfand triple U_n in U in H: Gram matrices of a finite basis
/// in the U and H inner products, with cached factorizations and the
/// generalized spectrum of (gram_U, gram_H).
template <class S = double>
class SpaceTriple {
 public:
  SpaceTriple(Mat<S> gram_U, Mat<S> gram_H, std::string label,
              TripleKind kind, std::vector<S> params)
      : gram_U_(std::move(gram_U)),
        gram_H_(std::move(gram_H)),
        label_(std::move(label)),
        kind_(kind),
        params_(std::move(params)) {
    const auto n = gram_U_.rows();
    if (n < 1 || gram_U_.cols() != n || gram_H_.rows() != n ||
        gram_H_.cols() != n) {
      throw ConstructionError("SpaceTriple: Gram matrices must be square and "
                              "of equal size");
    }
    check_symmetric(gram_U_, "gram_U");
    check_symmetric(gram_H_, "gram_H");
    llt_U_.compute(gram_U_);
    llt_H_.compute(gram_H_);
    if (llt_U_.info() != Eigen::Success || llt_H_.info() != Eigen::Success) {
      throw ConstructionError("SpaceTriple: Gram matrix is not positive "
                              "definite");
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat<S>> es(
        gram_U_, gram_H_, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) {
      throw NumericalError("SpaceTriple: generalized eigensolver failed for "
                           "triple '" + label_ + "'");
    }
    gen_values_ = es.eigenvalues();
    gen_vectors_ = es.eigenvectors();
    if (!(gen_values_(0) > 0) || !gen_values_.allFinite()) {
      throw NumericalError("SpaceTriple: non-positive generalized eigenvalue "
                           "in triple '" + label_ + "'");
    }
  }

  int dim() const { return static_cast<int>(gram_U_.rows()); }
  const Mat<S>& gram_U() const { return gram_U_; }
  const Mat<S>& gram_H() const { return gram_H_; }
  const std::string& label() const { return label_; }
  TripleKind kind() const { return kind_; }
  /// spectral: the eigenvalues; p1: {n_cells, length}.
  const std::vector<S>& params() const { return params_; }

  const Eigen::LLT<Mat<S>>& llt_U() const { return llt_U_; }
  const Eigen::LLT<Mat<S>>& llt_H() const { return llt_H_; }

  /// Ascending eigenvalues of gram_U v = lambda gram_H v.
  const Vec<S>& generalized_eigenvalues() const { return gen_values_; }
  /// gram_H-orthonormal eigenvectors matching generalized_eigenvalues().
  const Mat<S>& generalized_eigenvectors() const { return gen_vectors_; }

  S norm2_U(const Vec<S>& x) const { return x.dot(gram_U_ * x); }
  S norm2_H(const Vec<S>& x) const { return x.dot(gram_H_ * x); }

 private:
  static void check_symmetric(const Mat<S>& a, const char* what) {
    const S scale = a.cwiseAbs().maxCoeff();
    if (!a.allFinite() || (a - a.transpose()).cwiseAbs().maxCoeff() >
                              S(1e-14) * (scale > 0 ? scale : S(1))) {
      throw ConstructionError(std::string("SpaceTriple: ") + what +
                              " is not symmetric");
    }
  }

  Mat<S> gram_U_;
  Mat<S> gram_H_;
  std::string label_;
  TripleKind kind_;
  std::vector<S> params_;
  Eigen::LLT<Mat<S>> llt_U_;
  Eigen::LLT<Mat<S>> llt_H_;
  Vec<S> gen_values_;
  Mat<S> gen_vectors_;
};

template <class S = double>
SpaceTriple<S> make_spectral_triple(int n_modes,
                                    const std::vector<S>& eigenvalues) {
  if (n_modes < 1 || static_cast<int>(eigenvalues.size()) != n_modes) {
    throw ConstructionError("make_spectral_triple: need n_modes >= 1 "
                            "eigenvalues");
  }
  for (int i = 0; i < n_modes; ++i) {
    if (!(eigenvalues[i] > 0) || !std::isfinite(double(eigenvalues[i]))) {
      throw ConstructionError("make_spectral_triple: eigenvalues must be "
                              "positive");
    }
    if (i > 0 && eigenvalues[i] < eigenvalues[i - 1]) {
      throw ConstructionError("make_spectral_triple: eigenvalues must be "
                              "ascending");
    }
  }
  Vec<S> d(n_modes);
  for (int i = 0; i < n_modes; ++i) d(i) = eigenvalues[i];
  Mat<S> gu = d.asDiagonal();
  Mat<S> gh = Mat<S>::Identity(n_modes, n_modes);
  return SpaceTriple<S>(gu, gh, "spectral(" + std::to_string(n_modes) + ")",
                        TripleKind::spectral_diagonal, eigenvalues);
}

/// Spectral triple with lambda_j = j^2, j = 1..n (Dirichlet Laplacian on
/// (0, pi)).
template <class S = double>
SpaceTriple<S> make_default_spectral_triple(int n_modes) {
  std::vector<S> ev(n_modes > 0 ? n_modes : 0);
  for (int j = 0; j < n_modes; ++j) ev[j] = S(j + 1) * S(j + 1);
  return make_spectral_triple<S>(n_modes, ev);
}

template <class S = double>
SpaceTriple<S> make_p1_fem_triple(int n_cells, S length) {
  if (n_cells < 2) {
    throw ConstructionError("make_p1_fem_triple: n_cells must be >= 2");
  }
  if (!(length > 0)) {
    throw ConstructionError("make_p1_fem_triple: length must be positive");
  }
  const int n = n_cells - 1;
  const S h = length / S(n_cells);
  Mat<S> gu = Mat<S>::Zero(n, n);
  Mat<S> gh = Mat<S>::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    gu(i, i) = S(2) / h;
    gh(i, i) = S(4) * h / S(6);
    if (i + 1 < n) {
      gu(i, i + 1) = gu(i + 1, i) = S(-1) / h;
      gh(i, i + 1) = gh(i + 1, i) = h / S(6);
    }
  }
  return SpaceTriple<S>(gu, gh,
                        "p1(" + std::to_string(n_cells) + "," +
                            std::to_string(double(length)) + ")",
                        TripleKind::p1_fem_dirichlet, {S(n_cells), length});
}

/// Best mu_n with ||u||_U <= mu_n ||u||_H on U_n.
template <class S>
S inverse_inequality_constant(const SpaceTriple<S>& t) {
  return std::sqrt(t.generalized_eigenvalues()(t.dim() - 1));
}

/// Best discrete C_H with ||u||_H <= C_H ||u||_U on U_n.
template <class S>
S embedding_constant(const SpaceTriple<S>& t) {
  return S(1) / std::sqrt(t.generalized_eigenvalues()(0));
}

/// gram_H-normalized vector attaining ||u||_U = mu_n ||u||_H.
template <class S>
Vec<S> extremal_vector(const SpaceTriple<S>& t) {
  return t.generalized_eigenvectors().col(t.dim() - 1);
}

/// U'-norm sqrt(l^T gram_U^{-1} l) of the functional u -> l^T u.
template <class S>
S riesz_dual_norm(const SpaceTriple<S>& t, const Vec<S>& l) {
  require_dim(l.size(), t.dim(), "riesz_dual_norm");
  const Vec<S> y = t.llt_U().matrixL().solve(l);
  return y.norm();
}

/// Coefficient map from a coarse triple to a nested fine triple.
template <class S>
Mat<S> prolongation(const SpaceTriple<S>& coarse, const SpaceTriple<S>& fine) {
  if (coarse.kind() != fine.kind()) {
    throw DimensionError("prolongation: triples of different kinds");
  }
  const int nc = coarse.dim(), nf = fine.dim();
  if (coarse.kind() == TripleKind::spectral_diagonal) {
    if (nf < nc) throw DimensionError("prolongation: fine triple is smaller");
    for (int i = 0; i < nc; ++i) {
      if (std::abs(coarse.params()[i] - fine.params()[i]) >
          S(1e-12) * fine.params()[i]) {
        throw DimensionError("prolongation: spectral triples not nested");
      }
    }
    Mat<S> p = Mat<S>::Zero(nf, nc);
    p.topRows(nc).setIdentity();
    return p;
  }
  const int cc = static_cast<int>(coarse.params()[0]);
  const int cf = static_cast<int>(fine.params()[0]);
  if (cf % cc != 0 || std::abs(coarse.params()[1] - fine.params()[1]) >
                          S(1e-14) * fine.params()[1]) {
    throw DimensionError("prolongation: P1 meshes not nested");
  }
  const int r = cf / cc;
  Mat<S> p = Mat<S>::Zero(nf, nc);
  for (int jf = 1; jf < cf; ++jf) {
    const int cell = jf / r;
    const S frac = S(jf % r) / S(r);
    // coarse node c sits at fine node c*r; interior coarse nodes are 1..cc-1
    if (cell >= 1 && cell <= cc - 1) p(jf - 1, cell - 1) += 1 - frac;
    if (cell + 1 >= 1 && cell + 1 <= cc - 1 && frac > 0)
      p(jf - 1, cell) += frac;
  }
  return p;
}

enum class ContractionKind { zero, identity, neg_identity, scalar, custom };

inline const char* to_string(ContractionKind k) {
  switch (k) {
    case ContractionKind::zero: return "zero";
    case ContractionKind::identity: return "identity";
    case ContractionKind::neg_identity: return "neg-identity";
    case ContractionKind::scalar: return "scalar";
    case ContractionKind::custom: return "custom";
  }
  return "?";
}

/// The time coupling operator Phi through its H-pairing block
/// P_ij = <Phi phi_j, phi_i>_H.
template <class S = double>
struct ContractionMap {
  Mat<S> pairing_H;
  ContractionKind kind = ContractionKind::zero;
  S scalar = 0;  // meaningful for the built-in kinds
  S certified_norm = 0;

  bool is_zero() const { return kind == ContractionKind::zero; }
  std::string describe() const {
    if (kind == ContractionKind::scalar)
      return std::string("scalar(") + std::to_string(double(scalar)) + ")";
    return to_string(kind);
  }
};

/// Norm of the map u -> H-projection onto U_n of Phi u, in the H metric:
/// sqrt of the largest eigenvalue of (P^T gram_H^{-1} P, gram_H).
template <class S>
S certify_pairing(const SpaceTriple<S>& t, const Mat<S>& P) {
  const Mat<S> y = t.llt_H().matrixL().solve(P);  // L^{-1} P
  const Mat<S> lhs = y.transpose() * y;
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat<S>> es(
      lhs, t.gram_H(), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) {
    throw NumericalError("certify_pairing: eigensolver failed");
  }
  return std::sqrt(std::max(S(0), es.eigenvalues()(t.dim() - 1)));
}

template <class S>
ContractionMap<S> make_contraction(ContractionKind kind,
                                   const SpaceTriple<S>& t,
                                   const std::optional<Mat<S>>& custom = {},
                                   S c = 0) {
  ContractionMap<S> m;
  m.kind = kind;
  const int n = t.dim();
  switch (kind) {
    case ContractionKind::zero:
      m.pairing_H = Mat<S>::Zero(n, n);
      m.scalar = 0;
      m.certified_norm = 0;
      return m;
    case ContractionKind::identity:
      m.pairing_H = t.gram_H();
      m.scalar = 1;
      m.certified_norm = 1;
      return m;
    case ContractionKind::neg_identity:
      m.pairing_H = -t.gram_H();
      m.scalar = -1;
      m.certified_norm = 1;
      return m;
    case ContractionKind::scalar:
      if (std::abs(c) > 1 + S(1e-12)) {
        throw ContractionViolation(double(std::abs(c)),
                                   "make_contraction: |c| = " +
                                       std::to_string(double(std::abs(c))) +
                                       " exceeds 1");
      }
      m.pairing_H = c * t.gram_H();
      m.scalar = c;
      m.certified_norm = std::abs(c);
      return m;
    case ContractionKind::custom: {
      if (!custom) throw ConstructionError("make_contraction: custom kind "
                                           "needs a pairing matrix");
      if (custom->rows() != n || custom->cols() != n) {
        throw DimensionError("make_contraction: pairing must be dim x dim");
      }
      m.pairing_H = *custom;
      m.certified_norm = certify_pairing(t, *custom);
      if (m.certified_norm > 1 + S(1e-12)) {
        throw ContractionViolation(
            double(m.certified_norm),
            "make_contraction: certified norm " +
                std::to_string(double(m.certified_norm)) + " exceeds 1");
      }
      return m;
    }
  }
  throw ConstructionError("make_contraction: unknown kind");
}

/// Contraction from a coefficient map F (Phi phi_j = sum_i F_ij phi_i).
template <class S>
ContractionMap<S> contraction_from_operator(const SpaceTriple<S>& t,
                                            const Mat<S>& F) {
  return make_contraction<S>(ContractionKind::custom, t,
                             Mat<S>(t.gram_H() * F));
}

/// Bilinear form a(t; v, w) = c(t) v^T A w + w^T A0 v in U_n coordinates.
template <class S = double>
struct FormSpec {
  S alpha = 1;
  S M = 1;
  Mat<S> A;                       // A(i,j) = a(phi_j, phi_i) for c = 1
  Mat<S> A0;                      // time-independent additive part
  std::function<S(S)> coefficient;  // empty: c = 1
  S c_min = 1;
  S c_max = 1;
  S certified_coercivity = 0;
  S certified_continuity = 0;

  bool time_dependent() const { return static_cast<bool>(coefficient); }
  S c(S t) const { return coefficient ? coefficient(t) : S(1); }
  /// a(t) as a matrix for a given coefficient value.
  Mat<S> matrix_for(S cval) const { return cval * A + A0; }
};

namespace detail {

template <class S>
S coercivity_bound(const SpaceTriple<S>& t, const Mat<S>& a) {
  const Mat<S> sym = (a + a.transpose()) / S(2);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat<S>> es(
      sym, t.gram_U(), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success)
    throw NumericalError("FormSpec: coercivity eigensolve failed");
  return es.eigenvalues()(0);
}

template <class S>
S continuity_bound(const SpaceTriple<S>& t, const Mat<S>& a) {
  const Mat<S> y = t.llt_U().matrixL().solve(a);
  const Mat<S> lhs = y.transpose() * y;
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat<S>> es(
      lhs, t.gram_U(), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success)
    throw NumericalError("FormSpec: continuity eigensolve failed");
  return std::sqrt(std::max(S(0), es.eigenvalues()(t.dim() - 1)));
}

}  // namespace detail

/// Validated form. For a time-dependent coefficient, [c_min, c_max] must
/// bound c(t); the checks use the extreme values.
template <class S>
FormSpec<S> make_form(const SpaceTriple<S>& t, Mat<S> A, S alpha, S M,
                      std::function<S(S)> coefficient = {}, S c_min = 1,
                      S c_max = 1, Mat<S> A0 = {}) {
  const int n = t.dim();
  if (!(alpha > 0)) throw ConstructionError("make_form: alpha must be > 0");
  if (M < std::max(S(1), alpha))
    throw ConstructionError("make_form: M must be >= max(1, alpha)");
  if (A.rows() != n || A.cols() != n)
    throw DimensionError("make_form: A must be dim x dim");
  if (A0.size() == 0) A0 = Mat<S>::Zero(n, n);
  if (A0.rows() != n || A0.cols() != n)
    throw DimensionError("make_form: A0 must be dim x dim");
  if (!(c_min > 0) || c_max < c_min)
    throw ConstructionError("make_form: need 0 < c_min <= c_max");
  FormSpec<S> f;
  f.alpha = alpha;
  f.M = M;
  f.A = std::move(A);
  f.A0 = std::move(A0);
  f.coefficient = std::move(coefficient);
  f.c_min = f.coefficient ? c_min : S(1);
  f.c_max = f.coefficient ? c_max : S(1);
  const S coer = std::min(detail::coercivity_bound(t, f.matrix_for(f.c_min)),
                          detail::coercivity_bound(t, f.matrix_for(f.c_max)));
  const S cont = std::max(detail::continuity_bound(t, f.matrix_for(f.c_min)),
                          detail::continuity_bound(t, f.matrix_for(f.c_max)));
  f.certified_coercivity = coer;
  f.certified_continuity = cont;
  if (coer < alpha - S(1e-10) * std::max(S(1), alpha)) {
    throw ConstructionError("make_form: coercivity " + std::to_string(double(coer)) +
                            " below alpha " + std::to_string(double(alpha)));
  }
  if (cont > M + S(1e-10) * M) {
    throw ConstructionError("make_form: continuity " + std::to_string(double(cont)) +
                            " above M " + std::to_string(double(M)));
  }
  return f;
}

/// a(v, w) = scale <v, w>_U, with alpha = scale and M = max(1, scale).
template <class S>
FormSpec<S> make_scaled_form(const SpaceTriple<S>& t, S scale = 1) {
  return make_form<S>(t, Mat<S>(scale * t.gram_U()), scale,
                      std::max(S(1), scale));
}

/// Exponential change of unknown u = e^{lambda t} u_tilde.
template <class S = double>
struct DataTransform {
  S lambda = 0;
  /// f_tilde(t) = forward_factor(t) f(t)
  S forward_factor(S t) const { return std::exp(-lambda * t); }
  /// u(t) = backward_factor(t) u_tilde(t)
  S backward_factor(S t) const { return std::exp(lambda * t); }
};

template <class S = double>
struct RescaledProblem {
  FormSpec<S> form;
  ContractionMap<S> phi;
  DataTransform<S> transform;
};

/// Shift a -> a + lambda <.,.>_H, Phi -> e^{lambda T} Phi.
template <class S>
RescaledProblem<S> rescale_problem(const SpaceTriple<S>& t,
                                   const FormSpec<S>& form,
                                   const ContractionMap<S>& phi, S lambda,
                                   S T) {
  if (!(lambda >= 0)) throw DomainError("rescale_problem: lambda must be >= 0");
  if (!(T > 0)) throw DomainError("rescale_problem: T must be > 0");
  const S g = std::exp(lambda * T);
  const S new_norm = g * phi.certified_norm;
  if (new_norm > 1 + S(1e-12)) {
    throw RescaleInfeasible("rescale_problem: e^{lambda T} ||Phi|| = " +
                            std::to_string(double(new_norm)) + " > 1");
  }
  RescaledProblem<S> r;
  r.transform.lambda = lambda;
  if (lambda == 0) {
    r.form = form;
    r.phi = phi;
    return r;
  }
  const S ch = embedding_constant(t);
  r.form = make_form<S>(t, form.A, form.alpha, form.M + lambda * ch * ch,
                        form.coefficient, form.c_min, form.c_max,
                        Mat<S>(form.A0 + lambda * t.gram_H()));
  switch (phi.kind) {
    case ContractionKind::zero:
      r.phi = phi;
      break;
    case ContractionKind::custom:
      r.phi = make_contraction<S>(ContractionKind::custom, t,
                                  Mat<S>(g * phi.pairing_H));
      break;
    default: {
      const S c = g * phi.scalar;
      if (std::abs(c - 1) <= S(1e-12))
        r.phi = make_contraction<S>(ContractionKind::identity, t);
      else if (std::abs(c + 1) <= S(1e-12))
        r.phi = make_contraction<S>(ContractionKind::neg_identity, t);
      else
        r.phi = make_contraction<S>(ContractionKind::scalar, t, {}, c);
    }
  }
  return r;
}

}  // namespace stlab
