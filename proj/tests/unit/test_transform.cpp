#include "oulab/errors.hpp"
#include "oulab/test_functions.hpp"
#include "oulab/transform.hpp"
#include "oulab/verification/acceptance.hpp"
#include "oulab/verification/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace oulab;

namespace {

class BenchmarkTransform : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ctx_ = new verification::FieldContext(verification::make_context(fixtures::benchmark()));
    wf_ = new WeightFunction(ctx_->family);
  }
  static void TearDownTestSuite() {
    delete wf_;
    delete ctx_;
  }
  static verification::FieldContext* ctx_;
  static WeightFunction* wf_;
};
verification::FieldContext* BenchmarkTransform::ctx_ = nullptr;
WeightFunction* BenchmarkTransform::wf_ = nullptr;

Vector pt(double x) { return Vector::Constant(1, x); }

}  // namespace

TEST_F(BenchmarkTransform, WeightFactor) {
  // Q_s = 1: M_2 f = exp(x^2/4) f
  const auto f = [](double, const Vector& x) { return std::exp(-x[0] * x[0]); };
  const auto g = mp_apply(2.0, *wf_, f);
  for (double x : {0.0, 1.0, 2.5}) EXPECT_NEAR(g(1.0, pt(x)) / std::exp(-0.75 * x * x), 1.0, 1e-9);
  const auto back = mp_inverse(2.0, *wf_, g);
  for (double x : {-1.5, 0.3}) EXPECT_NEAR(back(2.0, pt(x)), f(2.0, pt(x)), 1e-12);
}

TEST_F(BenchmarkTransform, WeightOverflowIsReported) {
  const auto g = mp_apply(2.0, *wf_, [](double, const Vector&) { return 1.0; });
  EXPECT_THROW((void)g(1.0, pt(60.0)), RangeError);
}

TEST_F(BenchmarkTransform, DriftAndPotentialClosedForms) {
  for (double p : {1.5, 2.0, 4.0})
    for (double x : {-3.0, 0.0, 0.7, 5.0}) {
      EXPECT_NEAR(drift_FO(*wf_, p, 2.0, pt(x))[0], oracle::benchmark_FO(p, x), 1e-9);
      EXPECT_NEAR(potential_VO(*wf_, p, 2.0, pt(x)), oracle::benchmark_VO(p, x), 1e-9);
    }
  EXPECT_NEAR(potential_VO(*wf_, 2.0, 0.0, pt(2.0)), 1.0 - 0.5, 1e-9);
  EXPECT_NEAR(div_FO(*wf_, 2.0, 3.0), 0.0, 1e-9);
}

TEST(Transform, DriftVanishesAtOrigin) {
  const auto c = verification::make_context(fixtures::noncommuting());
  const WeightFunction wf(c.family);
  for (double p : {1.5, 3.0}) EXPECT_NEAR(drift_FO(wf, p, 1.0, Vector::Zero(2)).norm(), 0.0, 1e-14);
}

TEST_F(BenchmarkTransform, FittedConstants) {
  const auto k =
      fit_transform_constants(*wf_, 2.0, GridSpec::uniform({0.0, 10.0}, 0.5, Box::cube(1, -6, 6), 0.1));
  EXPECT_NEAR(k.k1, 0.25, 1e-8);
  EXPECT_NEAR(k.k0, 0.5, 1e-6);
  EXPECT_NEAR(k.c0, 0.0, 1e-8);
  EXPECT_EQ(k.theta, 2.0 / 3.0);
  const auto fine = check_vf_conditions(*wf_, k, GridSpec::uniform({0.0, 10.0}, 0.25, Box::cube(1, -6, 6), 0.05));
  EXPECT_TRUE(fine.pass);
}

TEST_F(BenchmarkTransform, ConjugationSecondOrder) {
  const auto u = make_gaussian_bump(0.5, Vector::Zero(1), 0.5, 5.0);
  const double coarse =
      conjugation_residual(*u, 2.0, *wf_, GridSpec::uniform({3.0, 7.0}, 0.05, Box::cube(1, -4, 4), 0.05));
  const double fine =
      conjugation_residual(*u, 2.0, *wf_, GridSpec::uniform({3.0, 7.0}, 0.025, Box::cube(1, -4, 4), 0.025));
  EXPECT_LE(coarse, 1e-3);
  EXPECT_LE(fine, 2.6e-4);
  const auto zero = make_constant(1, 0.0);
  EXPECT_EQ(conjugation_residual(*zero, 2.0, *wf_, GridSpec::uniform({3.0, 7.0}, 0.1, Box::cube(1, -4, 4), 0.1)),
            0.0);
}

TEST(Smallness, HandValues) {
  const auto a = smallness(2.0, 2.0 / 3.0, 0.0, 0.1, 1.0, 1.0);
  EXPECT_NEAR(a.value, 463.0 / 1200.0, 1e-15);
  EXPECT_TRUE(a.pass);
  const auto b = smallness(2.0, 2.0 / 3.0, 4.0, 0.0, 0.0, 1.0);
  EXPECT_NEAR(b.value, 7.0 / 3.0, 1e-15);
  EXPECT_FALSE(b.pass);
  EXPECT_TRUE(smallness(3.0, 2.9, 0.0, 0.0, 5.0, 7.0).pass);
}

TEST(Conditions, ConstantPotentialPasses) {
  const auto gc = GeneralCoefficients::heat(1, 2.0);
  const auto rep = check_A1_A5(gc, 2.0, GridSpec::uniform({0.0, 2.0}, 0.25, Box::cube(1, -2, 2), 0.25));
  EXPECT_TRUE(rep.pass());
}

TEST(Conditions, DoubleExponentialWeight) {
  const auto gc = GeneralCoefficients::from_json(nlohmann::json::parse(
      R"js({"N": 1, "a": "1", "V": "exp(exp(s + x1))", "W": "exp(exp(s + x1))",
          "constants": {"beta": 0.5, "gamma": 0.5}})js"));
  const auto rep = check_A1_A5(gc, 2.0, GridSpec::uniform({-2.0, 2.0}, 0.1, Box::cube(1, -2, 2), 0.1));
  EXPECT_TRUE(rep.item("A2").pass) << rep.to_json().dump();
}

TEST(Conditions, OuTuplePasses) {
  const auto c = verification::make_context(fixtures::benchmark());
  const WeightFunction wf(c.family);
  const auto k = fit_transform_constants(wf, 2.0, GridSpec::uniform({0.0, 10.0}, 0.5, Box::cube(1, -6, 6), 0.1));
  const auto gc = GeneralCoefficients::from_ou(wf, k, 0.01);
  const auto rep = check_A1_A5(gc, 2.0, GridSpec::uniform({0.0, 10.0}, 0.5, Box::cube(1, -6, 6), 0.1));
  EXPECT_TRUE(rep.pass()) << rep.to_json().dump();
}
