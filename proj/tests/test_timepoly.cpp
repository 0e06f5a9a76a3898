#include "stlab/quadrature.hpp"
#include "stlab/timepoly.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace stlab;

TEST(HilbertGram, SmallCases) {
  EXPECT_EQ(hilbert_gram<double>(0), Matrix::Ones(1, 1));
  Matrix a1(2, 2);
  a1 << 1, 0.5, 0.5, 1.0 / 3;
  EXPECT_EQ(hilbert_gram<double>(1), a1);
  const Matrix a2 = hilbert_gram<double>(2);
  EXPECT_DOUBLE_EQ(a2(0, 2), 1.0 / 3);
  EXPECT_DOUBLE_EQ(a2(1, 2), 0.25);
  EXPECT_DOUBLE_EQ(a2(2, 2), 0.2);
}

TEST(HilbertGram, DegreeGuard) {
  EXPECT_THROW(hilbert_gram<double>(13), ConditioningError);
  EXPECT_THROW(gram_inverse_formula(-1), ConditioningError);
}

TEST(GramInverse, QOneByDirectInversion) {
  const auto f = gram_inverse_formula(1);
  EXPECT_EQ(to_string(f(0, 0)), "4");
  EXPECT_EQ(to_string(f(0, 1)), "-6");
  EXPECT_EQ(to_string(f(1, 0)), "-6");
  EXPECT_EQ(to_string(f(1, 1)), "12");
  const Matrix inv = hilbert_gram<double>(1).inverse();
  EXPECT_NEAR((inv - f.cast<double>()).cwiseAbs().maxCoeff(), 0, 1e-12);
  EXPECT_EQ(to_string(gram_inverse_formula(0)(0, 0)), "1");
}

TEST(GramInverse, MatchesRationalGaussJordan) {
  for (int q = 0; q <= 9; ++q) {
    const auto f = gram_inverse_formula(q);
    const auto r = oracle::rational_hilbert_inverse(q);
    for (int i = 0; i <= q; ++i)
      for (int j = 0; j <= q; ++j) {
        ASSERT_EQ(r[i][j].den, 1) << "q=" << q;
        ASSERT_TRUE(r[i][j].num == f(i, j)) << "q=" << q << " (" << i << "," << j << ")";
      }
  }
}

TEST(GramInverse, ExactIntegerProductUpToTwelve) {
  for (int q = 0; q <= kMaxTimeDegree; ++q) EXPECT_TRUE(gram_inverse_exact(q)) << q;
}

TEST(GramInverse, FloatingProductIsIdentity) {
  for (int q = 0; q <= 7; ++q) {
    using LD = long double;
    const Mat<LD> p = gram_inverse_formula(q).cast<LD>() * hilbert_gram<LD>(q);
    EXPECT_LE(double((p - Mat<LD>::Identity(q + 1, q + 1)).cwiseAbs().maxCoeff()), 1e-9) << q;
  }
}

TEST(Legendre, LowDegrees) {
  const Matrix p = legendre_shifted<double>(1);
  EXPECT_DOUBLE_EQ(p(0, 0), 1);
  EXPECT_NEAR(p(1, 0), -std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(p(1, 1), 2 * std::sqrt(3.0), 1e-15);
}

TEST(Legendre, OrthonormalByQuadrature) {
  const Matrix p = legendre_shifted<double>(4);
  const auto [x, w] = oracle::golub_welsch(10);
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; b <= 4; ++b) {
      double s = 0;
      for (int i = 0; i < 10; ++i)
        s += w(i) * poly_eval(Vector(p.row(a).transpose()), x(i)) *
             poly_eval(Vector(p.row(b).transpose()), x(i));
      EXPECT_NEAR(s, a == b ? 1 : 0, 1e-10);
    }
}

TEST(Legendre, ProductGivesGramInverse) {
  for (int q = 0; q <= 7; ++q) {
    using LD = long double;
    const Mat<LD> p = legendre_shifted<LD>(q);
    const Mat<LD> f = gram_inverse_formula(q).cast<LD>();
    EXPECT_LE(double(((p.transpose() * p - f).cwiseAbs().maxCoeff()) / f.cwiseAbs().maxCoeff()),
              1e-15)
        << q;
  }
}

TEST(PsiBasis, KnownRows) {
  const auto b0 = psi_basis<double>(0);
  EXPECT_EQ(b0.coeffs(0, 0), 1);
  const auto b1 = psi_basis<double>(1);
  EXPECT_EQ(b1.coeffs(0, 0), 4);
  EXPECT_EQ(b1.coeffs(0, 1), -6);
  EXPECT_EQ(b1.coeffs(1, 0), -6);
  EXPECT_EQ(b1.coeffs(1, 1), 12);
  EXPECT_EQ(b1.psi_q0(), -6);
}

TEST(PsiBasis, DualityByQuadrature) {
  for (int q = 0; q <= 5; ++q) {
    const auto b = psi_basis<double>(q);
    const auto [x, w] = oracle::golub_welsch(q + 2);
    for (int i = 0; i <= q; ++i)
      for (int j = 0; j <= q; ++j) {
        double s = 0;
        for (int p = 0; p < x.size(); ++p)
          s += w(p) * poly_eval(Vector(b.coeffs.row(i).transpose()), x(p)) * std::pow(x(p), j);
        EXPECT_NEAR(s, i == j ? 1 : 0, 1e-10) << "q=" << q;
      }
  }
}

TEST(PolyEval, Examples) {
  EXPECT_DOUBLE_EQ(poly_eval(std::vector<double>{1}, 0.7), 1);
  EXPECT_DOUBLE_EQ(poly_eval(std::vector<double>{0, 1}, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(poly_eval(std::vector<double>{4, -6}, 0.5), 1);
}

TEST(Quadrature, GaussMatchesGolubWelsch) {
  for (int n : {1, 2, 5, 16, 31}) {
    const auto g = gauss_legendre<double>(n);
    const auto [x, w] = oracle::golub_welsch(n);
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(g.x[i], x(i), 1e-13);
      EXPECT_NEAR(g.w[i], w(i), 1e-13);
    }
  }
}

TEST(Quadrature, ExactForPolynomials) {
  const auto g = gauss_legendre<double>(5);
  for (int p = 0; p <= 9; ++p) {
    double s = 0;
    for (int i = 0; i < g.size(); ++i) s += g.w[i] * std::pow(g.x[i], p);
    EXPECT_NEAR(s, 1.0 / (p + 1), 1e-14);
  }
}
