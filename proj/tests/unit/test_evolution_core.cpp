#include "oulab/covariance.hpp"
#include "oulab/fundamental_solution.hpp"
#include "oulab/hypotheses.hpp"
#include "oulab/verification/acceptance.hpp"
#include "oulab/verification/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace oulab;

TEST(FundamentalSolution, ScalarClosedForm) {
  const FundamentalSolution fs(fixtures::benchmark());
  EXPECT_NEAR(propagate(fs, 0.0, 1.0)(0, 0), std::exp(1.0), 1e-10);
  EXPECT_NEAR(fs.U(1.0, 0.0)(0, 0), std::exp(1.0), 1e-10);
}

TEST(FundamentalSolution, IdentityAtEqualTimes) {
  const FundamentalSolution fs(fixtures::noncommuting());
  EXPECT_EQ((fs.U(2.3, 2.3) - Matrix::Identity(2, 2)).norm(), 0.0);
}

TEST(FundamentalSolution, DiagonalTimeDependent) {
  const auto f = CoefficientField::closed_form(2, {"1", "0", "0", "1"}, {"1", "0", "0", "2 + sin(s)"});
  const FundamentalSolution fs(f);
  const double pi = std::numbers::pi;
  const Matrix U = propagate(fs, 0.0, pi);
  // scalar oracle per diagonal entry: exp(int_0^pi b)
  EXPECT_NEAR(U(0, 0) / std::exp(pi), 1.0, 1e-9);
  EXPECT_NEAR(U(1, 1) / std::exp(2 * pi + 2), 1.0, 1e-9);
  EXPECT_NEAR(U(0, 1), 0.0, 1e-9);
}

TEST(FundamentalSolution, NoncommutingClosedFormAndCocycle) {
  const FundamentalSolution fs(fixtures::noncommuting());
  for (double t : {0.5, 1.7, 3.0}) {
    const Matrix ref = *oracle::fundamental("noncommuting", t, 0.2);
    EXPECT_LE((fs.U(t, 0.2) - ref).norm() / ref.norm(), 1e-9);
  }
  const Matrix lhs = fs.U(3.0, 1.0) * fs.U(1.0, 0.5);
  EXPECT_LE((lhs - fs.U(3.0, 0.5)).norm() / lhs.norm(), 1e-9);
  EXPECT_LE((fs.U(1.0, 2.0) * fs.U(2.0, 1.0) - Matrix::Identity(2, 2)).norm(), 1e-9);
}

class CovarianceTest : public ::testing::Test {
 protected:
  static verification::FieldContext ctx(const CoefficientField& f) { return verification::make_context(f); }
};

TEST_F(CovarianceTest, BenchmarkIsOne) {
  const auto c = ctx(fixtures::benchmark());
  for (double s : {0.0, 3.3, 10.0}) EXPECT_NEAR(c.family->Qs(s)(0, 0), 1.0, 1e-8);
}

TEST_F(CovarianceTest, IsotropicIsIdentity) {
  const auto c = ctx(fixtures::isotropic2());
  EXPECT_LE((c.family->Qs(4.0) - Matrix::Identity(2, 2)).norm(), 1e-8);
}

TEST_F(CovarianceTest, NonnormalMatchesLyapunovSolve) {
  const auto f = fixtures::autonomous_nonnormal();
  const auto c = ctx(f);
  const Matrix ref = oracle::lyapunov(f.B(0.0), f.Q(0.0));
  EXPECT_LE((c.family->Qs(5.0) - ref).norm(), 1e-7);
  const Matrix Q = c.family->Qs(5.0);
  EXPECT_LE((f.B(0.0) * Q + Q * f.B(0.0).transpose() - f.Q(0.0)).norm(), 1e-7);
}

TEST(TransitionKernel, BenchmarkClosedForm) {
  const FundamentalSolution fs(fixtures::benchmark());
  for (double t : {0.0, 0.3, 2.0, 20.0}) {
    const auto k = transition_covariance(fs, 1.0, 1.0 + t);
    EXPECT_NEAR(k.Sigma(0, 0), oracle::benchmark_sigma(t), 1e-10);
    EXPECT_NEAR(k.E(0, 0), oracle::benchmark_mean(t), 1e-10);
  }
  const auto k0 = transition_covariance(fs, 2.0, 2.0);
  EXPECT_EQ(k0.Sigma(0, 0), 0.0);
  EXPECT_EQ(k0.E(0, 0), 1.0);
}

TEST(CovarianceBounds, BenchmarkConstants) {
  const auto c = verification::make_context(fixtures::benchmark());
  const auto b = covariance_bounds(*c.family, {0.0, 10.0});
  EXPECT_NEAR(b.C1, 1.0, 1e-7);
  EXPECT_NEAR(b.C2, 1.0, 1e-7);
  EXPECT_NEAR(b.proof_C2, 1.0, 1e-5);
  EXPECT_GE(b.det_min, std::pow(b.C1, 1) * (1 - 1e-9));
  EXPECT_LE(b.det_max, std::pow(b.C2, 1) * (1 + 1e-9));
}

TEST(CovarianceBounds, IsotropicDeterminantContained) {
  const auto c = verification::make_context(fixtures::isotropic2());
  const auto b = covariance_bounds(*c.family, {0.0, 10.0});
  EXPECT_NEAR(b.C1, 1.0, 1e-7);
  EXPECT_NEAR(b.C2, 1.0, 1e-7);
  EXPECT_GE(b.det_min, b.C1 * b.C1 * (1 - 1e-9));
  EXPECT_LE(b.det_max, b.C2 * b.C2 * (1 + 1e-9));
}
