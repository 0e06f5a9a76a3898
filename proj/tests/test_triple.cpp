#include "stlab/modal.hpp"
#include "stlab/triple.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace stlab;

TEST(SpectralTriple, Examples) {
  const auto t1 = make_spectral_triple<double>(1, {1});
  EXPECT_EQ(t1.gram_U()(0, 0), 1);
  EXPECT_EQ(t1.gram_H()(0, 0), 1);
  const auto t3 = make_spectral_triple<double>(3, {1, 4, 9});
  EXPECT_EQ(t3.gram_U(), Vector((Vector(3) << 1, 4, 9).finished()).asDiagonal().toDenseMatrix());
  EXPECT_NEAR(inverse_inequality_constant(t3), 3, 1e-14);
  const auto t2 = make_spectral_triple<double>(2, {2, 2});
  EXPECT_NEAR(embedding_constant(t2), 1 / std::sqrt(2.0), 1e-15);
}

TEST(SpectralTriple, Errors) {
  EXPECT_THROW(make_spectral_triple<double>(2, {1, -1}), ConstructionError);
  EXPECT_THROW(make_spectral_triple<double>(2, {4, 1}), ConstructionError);
  EXPECT_THROW(make_spectral_triple<double>(0, {}), ConstructionError);
  EXPECT_THROW(make_spectral_triple<double>(2, {1}), ConstructionError);
}

TEST(SpectralTriple, InverseInequalityAndEmbedding) {
  EXPECT_NEAR(inverse_inequality_constant(make_spectral_triple<double>(1, {1})), 1, 1e-15);
  EXPECT_NEAR(inverse_inequality_constant(make_spectral_triple<double>(2, {1, 100})), 10, 1e-13);
  EXPECT_NEAR(embedding_constant(make_spectral_triple<double>(1, {1})), 1, 1e-15);
  EXPECT_NEAR(embedding_constant(make_spectral_triple<double>(1, {4})), 0.5, 1e-15);
}

TEST(P1Triple, TwoCells) {
  const auto t = make_p1_fem_triple<double>(2, 1.0);
  ASSERT_EQ(t.dim(), 1);
  EXPECT_NEAR(t.gram_U()(0, 0), 4, 1e-14);
  EXPECT_NEAR(t.gram_H()(0, 0), 1.0 / 3, 1e-15);
  EXPECT_THROW(make_p1_fem_triple<double>(1, 1.0), ConstructionError);
  EXPECT_THROW(make_p1_fem_triple<double>(4, 0.0), ConstructionError);
}

TEST(P1Triple, SpectrumMatchesClosedForm) {
  for (int n : {4, 8, 16}) {
    const auto t = make_p1_fem_triple<double>(n, 1.0);
    for (int j = 1; j < n; ++j)
      EXPECT_NEAR(t.generalized_eigenvalues()(j - 1), oracle::p1_eigenvalue(j, n, 1.0),
                  1e-10 * oracle::p1_eigenvalue(j, n, 1.0));
  }
}

TEST(P1Triple, FourCellsInverseInequality) {
  // The closed form gives mu_n^2 = 96 (1 + cos(pi/4)) / (2 - cos(pi/4)).
  const auto t = make_p1_fem_triple<double>(4, 1.0);
  const auto ev = oracle::brute_generalized_eigenvalues(t.gram_U(), t.gram_H());
  EXPECT_NEAR(inverse_inequality_constant(t), std::sqrt(ev.back()), 1e-10);
  const double c = std::cos(std::numbers::pi / 4);
  EXPECT_NEAR(inverse_inequality_constant(t), std::sqrt(96 * (1 + c) / (2 - c)), 1e-10);
}

TEST(P1Triple, InverseInequalityScalesLikeOneOverH) {
  const double m8 = inverse_inequality_constant(make_p1_fem_triple<double>(8, 1.0));
  const double m16 = inverse_inequality_constant(make_p1_fem_triple<double>(16, 1.0));
  const double m32 = inverse_inequality_constant(make_p1_fem_triple<double>(32, 1.0));
  auto top = [](int n) { return std::sqrt(oracle::p1_eigenvalue(n - 1, n, 1.0)); };
  EXPECT_NEAR(m16 / m8, top(16) / top(8), 1e-10);
  EXPECT_NEAR(m32 / m16, top(32) / top(16), 1e-10);
  EXPECT_NEAR(m32 / m16, 2, 0.025);
  const auto t = make_p1_fem_triple<double>(8, 1.0);
  EXPECT_GE(embedding_constant(t) * inverse_inequality_constant(t), 1);
}

TEST(RieszDualNorm, Examples) {
  const auto t = make_spectral_triple<double>(1, {4});
  EXPECT_EQ(riesz_dual_norm(t, Vector(Vector::Zero(1))), 0);
  EXPECT_NEAR(riesz_dual_norm(t, Vector(Vector::Constant(1, 2.0))), 1, 1e-15);
  EXPECT_THROW(riesz_dual_norm(t, Vector(Vector::Zero(2))), DimensionError);
}

TEST(RieszDualNorm, MonteCarloSup) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (const auto& t : {make_default_spectral_triple<double>(6), make_p1_fem_triple<double>(7, 1.0)}) {
    for (int r = 0; r < 5; ++r) {
      Vector l(t.dim());
      for (auto& x : l) x = nd(rng);
      const double mc = oracle::mc_dual_norm(t.gram_U(), l, rng);
      EXPECT_NEAR(riesz_dual_norm(t, l), mc, 0.02 * mc);
    }
  }
}

TEST(Contraction, BuiltinKinds) {
  const auto t = make_p1_fem_triple<double>(5, 1.0);
  const auto z = make_contraction(ContractionKind::zero, t);
  EXPECT_EQ(z.pairing_H.norm(), 0);
  EXPECT_EQ(z.certified_norm, 0);
  const auto id = make_contraction(ContractionKind::identity, t);
  EXPECT_EQ(id.pairing_H, t.gram_H());
  EXPECT_EQ(id.certified_norm, 1);
  const auto neg = make_contraction<double>(ContractionKind::scalar, t, {}, -1.0);
  EXPECT_EQ(neg.certified_norm, 1);
  EXPECT_EQ(neg.pairing_H, Matrix(-t.gram_H()));
}

TEST(Contraction, CustomNormCertified) {
  const auto t = make_p1_fem_triple<double>(5, 1.0);
  Matrix F = Matrix::Zero(4, 4);
  F(0, 0) = 0.5;
  F(3, 1) = 0.3;
  const auto c = contraction_from_operator(t, F);
  EXPECT_LE(c.certified_norm, 1);
  EXPECT_GT(c.certified_norm, 0.29);
  try {
    contraction_from_operator(t, Matrix(2.0 * Matrix::Identity(4, 4)));
    FAIL() << "expected ContractionViolation";
  } catch (const ContractionViolation& e) {
    EXPECT_NEAR(e.norm(), 2, 1e-10);
  }
  EXPECT_THROW(make_contraction<double>(ContractionKind::scalar, t, {}, 1.5), ContractionViolation);
}

TEST(Form, ChecksConstants) {
  const auto t = make_default_spectral_triple<double>(4);
  const auto f = make_scaled_form(t, 1.0);
  EXPECT_NEAR(f.certified_coercivity, 1, 1e-12);
  EXPECT_NEAR(f.certified_continuity, 1, 1e-12);
  EXPECT_THROW(make_form<double>(t, t.gram_U(), 2.0, 2.0), ConstructionError);
  EXPECT_THROW(make_form<double>(t, t.gram_U(), 0.5, 0.5), ConstructionError);
  Matrix skew = t.gram_U();
  skew(0, 1) = 3;
  skew(1, 0) = -3;
  EXPECT_THROW(make_form<double>(t, skew, 1.0, 1.0), ConstructionError);
  EXPECT_NO_THROW(make_form<double>(t, skew, 1.0, 3.0));
}

TEST(Rescale, Examples) {
  const auto t = make_default_spectral_triple<double>(3);
  const auto f = make_scaled_form(t, 1.0);
  const auto id = make_contraction(ContractionKind::identity, t);
  const auto r0 = rescale_problem(t, f, id, 0.0, 1.0);
  EXPECT_EQ(r0.phi.kind, ContractionKind::identity);
  EXPECT_EQ(r0.form.A, f.A);
  const auto half = make_contraction<double>(ContractionKind::scalar, t, {}, 0.5);
  const auto r = rescale_problem(t, f, half, std::log(2.0), 1.0);
  EXPECT_EQ(r.phi.kind, ContractionKind::identity);
  EXPECT_NEAR(r.form.M, 1 + std::log(2.0), 1e-12);
  EXPECT_THROW(rescale_problem(t, f, id, 1.0, 1.0), RescaleInfeasible);
}

TEST(Prolongation, NestedP1InterpolatesLinears) {
  const auto c = make_p1_fem_triple<double>(4, 1.0);
  const auto f = make_p1_fem_triple<double>(16, 1.0);
  const Matrix R = prolongation(c, f);
  // hat function of the coarse node at x = 0.5
  Vector e = Vector::Zero(3);
  e(1) = 1;
  const Vector v = R * e;
  for (int j = 1; j < 16; ++j) {
    const double x = j / 16.0;
    EXPECT_NEAR(v(j - 1), std::max(0.0, 1 - std::abs(x - 0.5) / 0.25), 1e-14);
  }
  // coarse Gram matrices are the Galerkin restrictions of the fine ones
  EXPECT_NEAR((R.transpose() * f.gram_H() * R - c.gram_H()).norm(), 0, 1e-13);
  EXPECT_NEAR((R.transpose() * f.gram_U() * R - c.gram_U()).norm(), 0, 1e-12);
}

TEST(Prolongation, SpectralAndMismatch) {
  const auto c = make_default_spectral_triple<double>(3);
  const auto f = make_default_spectral_triple<double>(6);
  const Matrix R = prolongation(c, f);
  EXPECT_EQ(R.topRows(3), Matrix::Identity(3, 3));
  EXPECT_EQ(R.bottomRows(3).norm(), 0);
  EXPECT_THROW(prolongation(f, c), DimensionError);
  EXPECT_THROW(prolongation(make_p1_fem_triple<double>(4, 1.0), make_p1_fem_triple<double>(6, 1.0)),
               DimensionError);
}

TEST(Modal, SineAtomPairingsAreGalerkin) {
  // For P1 the U-pairing of sin(pi x) equals Lambda times its H-pairing.
  const auto t = make_p1_fem_triple<double>(8, 1.0);
  const auto a = sine_atom(t, 0);
  EXPECT_NEAR((a.pair_U - a.Lambda * a.pair_H).norm(), 0, 1e-10 * a.pair_U.norm());
  EXPECT_NEAR(a.h_norm2, 0.5, 1e-15);
}

TEST(Modal, FunctionNormsAndErrors) {
  const auto t = make_default_spectral_triple<double>(3);
  ModalFunction<double> u(3);
  u.add(mode_atom(t, 1), exp_time(-1.0, 2.0));
  EXPECT_NEAR(u.norm2_H(0), 4, 1e-15);
  EXPECT_NEAR(u.norm2_U(0), 16, 1e-15);
  EXPECT_NEAR(u.norm2_dual(0), 1, 1e-15);
  EXPECT_NEAR(u.pair_H(1.0, 1)(1), -2 * std::exp(-1.0), 1e-15);
  EXPECT_THROW(u.add(mode_atom(t, 1), exp_time(-1.0)), DomainError);
  EXPECT_THROW(mode_atom(t, 5), DomainError);
  const auto far = spectral_atom(t, 5, 36.0);
  EXPECT_EQ(far.pair_H.norm(), 0);
}

TEST(Modal, CosResponseSolvesOde) {
  const double lam = 3, om = 2;
  const auto y = cos_response_time(lam, om);
  const auto f = cos_time(om);
  for (double t : {0.0, 0.3, 1.7})
    EXPECT_NEAR(y(t, 1) + lam * y(t, 0), f(t, 0), 1e-14);
  const auto p = poly_time<double>({1, 2, 3});
  EXPECT_DOUBLE_EQ(p(2.0, 0), 17);
  EXPECT_DOUBLE_EQ(p(2.0, 1), 14);
  EXPECT_DOUBLE_EQ(p(2.0, 2), 6);
  EXPECT_DOUBLE_EQ(p(2.0, 3), 0);
}
