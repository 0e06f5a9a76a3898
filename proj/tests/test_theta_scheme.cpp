#include "stlab/norms.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace stlab;

namespace {

SpaceTriple<double> one_mode(double lam) { return make_spectral_triple<double>(1, {lam}); }

}  // namespace

TEST(AverageForm, ConstantForm) {
  const auto t = make_default_spectral_triple<double>(3);
  const auto d = average_form(make_scaled_form(t, 1.0), t, make_grid(1.0, 5));
  ASSERT_EQ(d.A.size(), 5u);
  for (const auto& a : d.A) EXPECT_EQ(a, t.gram_U());
}

TEST(AverageForm, LinearLoad) {
  const auto t = one_mode(1);
  const LoadFn<double> f = [](double s) { return Vector(Vector::Constant(1, s)); };
  const auto d = average_form(make_scaled_form(t, 1.0), t, make_grid(1.0, 2), f);
  EXPECT_NEAR(d.f[0](0), 0.25, 1e-15);
  EXPECT_NEAR(d.f[1](0), 0.75, 1e-15);
}

TEST(AverageForm, TimeDependentCoefficient) {
  const auto t = one_mode(1);
  const double T = 1, pi = std::numbers::pi;
  const auto form = make_form<double>(t, t.gram_U(), 0.5, 1.5,
                                      [=](double s) { return 1 + 0.5 * std::cos(2 * pi * s / T); },
                                      0.5, 1.5);
  const auto g = make_grid(T, 4);
  const auto d = average_form(form, t, g);
  for (int m = 0; m < 4; ++m) {
    const double a = g.node(m), b = g.node(m + 1);
    const double exact =
        1 + 0.5 * T / (2 * pi) * (std::sin(2 * pi * b / T) - std::sin(2 * pi * a / T)) / g.k;
    EXPECT_NEAR(d.A[m](0, 0), exact, 1e-12);
  }
}

TEST(AverageForm, NonFiniteLoad) {
  const auto t = one_mode(1);
  const LoadFn<double> f = [](double) { return Vector::Constant(1, std::nan("")); };
  EXPECT_THROW(average_form(make_scaled_form(t, 1.0), t, make_grid(1.0, 2), f), NumericalError);
}

TEST(SolveTheta, ZeroData) {
  const auto t = make_default_spectral_triple<double>(3);
  const auto g = make_grid(1.0, 4);
  const auto s = solve_theta(average_form(make_scaled_form(t, 1.0), t, g), 0.5,
                             make_contraction(ContractionKind::zero, t), Vector(Vector::Zero(3)), t, g);
  EXPECT_EQ(s.w.norm(), 0);
}

TEST(SolveTheta, ScalarRecurrence) {
  const double lam = 5;
  const auto t = one_mode(lam);
  const auto form = make_form<double>(t, t.gram_U(), 1.0, 1.0);
  const auto g = make_grid(1.0, 7);
  for (double th : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto s = solve_theta(average_form(form, t, g), th,
                               make_contraction(ContractionKind::zero, t), Vector(Vector::Ones(1)), t, g);
    const double r = oracle::theta_amplification(th, g.k, lam);
    for (int m = 0; m <= 7; ++m) EXPECT_NEAR(s.w(0, m), std::pow(r, m), 1e-13) << th;
  }
}

TEST(SolveTheta, MarchingAgreesWithGlobal) {
  const auto t = make_p1_fem_triple<double>(6, 1.0);
  const auto g = make_grid(0.5, 8);
  Vector xi = Vector::LinSpaced(5, 1, 2);
  const LoadFn<double> f = [](double s) { return Vector::Constant(5, std::sin(3 * s)); };
  const auto slabs = average_form(make_scaled_form(t, 1.0), t, g, f);
  const auto z = make_contraction(ContractionKind::zero, t);
  const auto a = march_theta(slabs, 0.3, xi, t, g);
  const auto b = solve_theta_block(slabs, 0.3, z, xi, t, g);
  EXPECT_LE((a.w - b.w).norm(), 1e-11 * a.w.norm());
}

TEST(SolveTheta, CounterexampleIsSingular) {
  const auto t = one_mode(1);
  const auto form = make_form<double>(t, Matrix::Constant(1, 1, 2.0), 2.0, 2.0);
  const auto g = make_grid(1.0, 1);
  const auto neg = make_contraction(ContractionKind::neg_identity, t);
  const auto slabs = average_form(form, t, g);
  try {
    solve_theta(slabs, 0.0, neg, Vector(Vector::Ones(1)), t, g);
    FAIL() << "expected SingularSchemeError";
  } catch (const SingularSchemeError& e) {
    EXPECT_LT(e.smallest_singular_value(), 1e-12 * e.largest_singular_value());
  }
  const auto s = solve_theta(slabs, 1.0, neg, Vector(Vector::Ones(1)), t, g);
  // w1 + w0 = 1 and (w1 - w0) + 2 w1 = 0
  EXPECT_NEAR(s.w(0, 0), 0.75, 1e-14);
  EXPECT_NEAR(s.w(0, 1), 0.25, 1e-14);
}

TEST(SolveTheta, ThetaOutsideRange) {
  const auto t = one_mode(1);
  const auto g = make_grid(1.0, 2);
  EXPECT_THROW(solve_theta(average_form(make_scaled_form(t, 1.0), t, g), 1.5,
                           make_contraction(ContractionKind::zero, t), Vector(Vector::Ones(1)), t, g),
               DomainError);
}

TEST(SolveTheta, PeriodicSolutionIsPeriodic) {
  const auto t = make_default_spectral_triple<double>(4);
  const auto g = make_grid(1.0, 16);
  const LoadFn<double> f = [](double s) { return Vector::Constant(4, std::cos(2 * std::numbers::pi * s)); };
  const auto s = solve_theta(average_form(make_scaled_form(t, 1.0), t, g, f), 0.5,
                             make_contraction(ContractionKind::identity, t), Vector(Vector::Zero(4)), t, g);
  EXPECT_LE((s.w.col(0) - s.w.col(16)).norm(), 1e-12);
}

TEST(Reconstruct, NodalAndPlateau) {
  ThetaSolution<double> s{1.0, make_grid(1.0, 2), Matrix(1, 3)};
  s.w << 1, 2, 3;
  EXPECT_EQ(reconstruct(s, 0.25)(0), 2);
  s.theta = 0;
  EXPECT_EQ(reconstruct(s, 0.5)(0), 2);
  EXPECT_EQ(reconstruct(s, 0.75)(0), 2);
  EXPECT_THROW(reconstruct(s, 1.5), DomainError);
  ThetaSolution<double> alt{0.5, make_grid(1.0, 4), Matrix(2, 5)};
  for (int m = 0; m <= 4; ++m) alt.w.col(m) = (m % 2 ? -1.0 : 1.0) * Vector(Vector::Ones(2));
  EXPECT_EQ(reconstruct(alt, 0.1).norm(), 0);
  EXPECT_EQ(reconstruct(alt, 0.25), Vector(-Vector(Vector::Ones(2))));
}

TEST(DiscreteDerivative, Examples) {
  const auto g = make_grid(2.0, 4);
  ThetaSolution<double> c{1.0, g, Matrix::Ones(2, 5)};
  EXPECT_EQ(discrete_derivative(c).norm(), 0);
  ThetaSolution<double> ramp{1.0, g, Matrix(2, 5)};
  const Vector v = (Vector(2) << 1, -2).finished();
  for (int m = 0; m <= 4; ++m) ramp.w.col(m) = m * g.k * v;
  const Matrix d = discrete_derivative(ramp);
  for (int m = 0; m < 4; ++m) EXPECT_NEAR((d.col(m) - v).norm(), 0, 1e-14);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  ThetaSolution<double> r{0.3, g, Matrix(3, 5)};
  for (int i = 0; i < r.w.size(); ++i) r.w.data()[i] = nd(rng);
  const Matrix dr = discrete_derivative(r);
  EXPECT_NEAR((g.k * dr.rowwise().sum() - (r.w.col(4) - r.w.col(0))).norm(), 0, 1e-12);
}

TEST(ThetaSystem, SingleStepHandAssembly) {
  // N = 1, lambda = 3, theta = 1: rows k*(step) and the coupling row.
  const auto t = one_mode(3);
  const auto g = make_grid(1.0, 1);
  const auto sys = assemble_theta_system(average_form(make_scaled_form(t, 3.0), t, g), 1.0,
                                         make_contraction(ContractionKind::zero, t),
                                         Vector(Vector::Ones(1)), t, g);
  const Matrix B(sys.B);
  Matrix expect(2, 2);
  // the step row (w1 - w0) + k a w1 with a = 3 * 3 = 9
  expect << -1, 10, 1, 0;
  EXPECT_NEAR((B - expect).norm(), 0, 1e-14);
}
