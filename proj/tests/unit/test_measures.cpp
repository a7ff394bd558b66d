#include "oulab/measures.hpp"
#include "oulab/test_functions.hpp"
#include "oulab/verification/acceptance.hpp"
#include "oulab/verification/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace oulab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<int>(v.size()));
  int i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

}  // namespace

TEST(GaussianMeasure, Densities) {
  const GaussianMeasure m1(Matrix::Identity(1, 1));
  EXPECT_NEAR(m1.density(vec({0.0})), 1.0 / std::sqrt(2 * std::numbers::pi), 1e-15);
  EXPECT_EQ(m1.density(vec({1e3})), 0.0);
  const GaussianMeasure m2(Matrix::Identity(2, 2));
  EXPECT_NEAR(m2.density(vec({1.0, 0.0})), std::exp(-0.5) / (2 * std::numbers::pi), 1e-15);
}

TEST(GaussianMeasure, LpNorms) {
  const GaussianMeasure m(Matrix::Identity(1, 1));
  EXPECT_NEAR(lp_norm_mu([](const Vector&) { return -3.0; }, m, 1.7), 3.0, 1e-12);
  EXPECT_NEAR(lp_norm_mu([](const Vector& x) { return x[0]; }, m, 2.0), 1.0, 1e-12);
  EXPECT_NEAR(lp_norm_mu([](const Vector& x) { return x[0] * x[0]; }, m, 2.0), std::sqrt(3.0), 1e-12);
}

TEST(GaussianMeasure, BumpExpectationMatchesClosedForm) {
  Matrix S(2, 2);
  S << 1.5, 0.4, 0.4, 0.8;
  const Vector c = vec({0.3, -0.2});
  const double a = 0.7;
  const GaussianMeasure m(S);
  const double got = integrate(m, [&](const Vector& x) { return std::exp(-a * (x - c).squaredNorm()); }).value;
  EXPECT_NEAR(got, oracle::gaussian_bump_expectation(a, c, Vector::Zero(2), S), 1e-12);
}

TEST(SpaceTimeMeasure, Integrals) {
  const auto c = verification::make_context(fixtures::benchmark());
  const SpaceTimeMeasure nu(*c.family, {0.0, 2.0});
  EXPECT_NEAR(nu_integral([](double, const Vector&) { return 1.0; }, nu, {0.0, 2.0}), 2.0, 1e-10);
  EXPECT_NEAR(nu_integral([](double, const Vector& x) { return x[0] * x[0]; }, nu, {0.0, 1.0}), 1.0, 1e-8);
  EXPECT_NEAR(nu_integral([](double s, const Vector&) { return s; }, nu, {0.0, 1.0}), 0.5, 1e-12);
}

TEST(Sampler, VarianceAndDeterminism) {
  const GaussianMeasure m(Matrix::Identity(1, 1));
  const auto a = sample(m, 100000, 123);
  double v = 0.0;
  for (const auto& x : a) v += x[0] * x[0];
  v /= static_cast<double>(a.size());
  EXPECT_GE(v, 0.98);
  EXPECT_LE(v, 1.02);
  const auto b = sample(m, 100, 123);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a[static_cast<std::size_t>(i)][0], b[static_cast<std::size_t>(i)][0]);
}

TEST(Sampler, IndependentAxes) {
  Matrix S = Matrix::Zero(2, 2);
  S(0, 0) = 1.0;
  S(1, 1) = 4.0;
  const auto xs = sample(GaussianMeasure(S), 100000, 5);
  double c = 0.0;
  for (const auto& x : xs) c += x[0] * x[1];
  c /= static_cast<double>(xs.size());
  EXPECT_LE(std::abs(c), 0.05);
}
