#include "oulab/errors.hpp"
#include "oulab/estimate_lab.hpp"
#include "oulab/test_functions.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace oulab;

namespace {

EstimateOptions small_options() {
  EstimateOptions o;
  o.grid = GridSpec::uniform({0.0, 10.0}, 0.05, Box::cube(1, -6, 6), 0.1);
  return o;
}

Corpus single(TestFunctionPtr f) { return {{"u", std::move(f)}}; }

}  // namespace

TEST(GridCalculus, ConstantNorm) {
  const GridSpec g = GridSpec::uniform({0.0, 2.0}, 0.1, Box::cube(2, -1, 1), 0.1);
  NormInfo info;
  const double n1 = lp_norm(GridFunction(g, 1.0), 1.0, &info);
  EXPECT_NEAR(info.full_measure, 16.0 / 2.0, 1e-12);
  EXPECT_NEAR(n1, info.interior_measure, 1e-12);
  EXPECT_LT(info.interior_measure, info.full_measure);
  EXPECT_THROW(lp_norm(GridFunction(g, 1.0), 0.5), Error);
}

TEST(GridCalculus, GradientOfLinear) {
  const GridSpec g = GridSpec::uniform({0.0, 1.0}, 0.5, Box::cube(1, -2, 2), 0.1);
  const auto d = grad_x(GridFunction::sample(g, [](double, const Vector& x) { return x[0]; }));
  for (int k = 0; k < g.nt; ++k)
    for (std::size_t j = 0; j < g.slice_size(); ++j) EXPECT_NEAR(d[0].at(k, j), 1.0, 1e-12);
}

TEST(GridCalculus, HeatOperatorSecondOrder) {
  const auto u = [](double s, const Vector& x) { return std::exp(-s * s - x[0] * x[0]); };
  const auto exact = [](double s, double x) { return (4 * x * x - 2 + 2 * s) * std::exp(-s * s - x * x); };
  double err[2];
  for (int level = 0; level < 2; ++level) {
    const double h = level == 0 ? 0.05 : 0.025;
    const GridSpec g = GridSpec::uniform({-1.0, 1.0}, h, Box::cube(1, -2, 2), h);
    const GridFunction L = heat_op(GridFunction::sample(g, u));
    err[level] = 0.0;
    for (int k = 1; k + 1 < g.nt; ++k)
      for (std::size_t j = 1; j + 1 < g.slice_size(); ++j)
        err[level] = std::max(err[level], std::abs(L.at(k, j) - exact(g.time(k), g.point(j)[0])));
  }
  EXPECT_GT(std::log2(err[0] / err[1]), 1.9);
}

TEST(Estimates, ZeroIsSkipped) {
  const Corpus c = single(make_constant(1, 0.0));
  const auto rep = verify_interpolation(c, 2.0, small_options());
  EXPECT_EQ(rep.skipped, 1);
  const auto ap = verify_apriori(c, GeneralCoefficients::heat(1, 1.0), 2.0, small_options());
  EXPECT_EQ(ap.skipped, 1);
  const auto l1 = verify_L1_and_sup(c, GeneralCoefficients::heat(1, 1.0), small_options());
  EXPECT_TRUE(l1.pass);
}

TEST(Estimates, InterpolationOnBumps) {
  const auto rep = verify_interpolation(bump_corpus(1, 6, 3), 2.0, default_estimate_options(1));
  EXPECT_TRUE(rep.pass) << rep.to_json().dump();
  EXPECT_TRUE(std::isfinite(rep.worst));
}

TEST(Estimates, DissipativityIntegrationByParts) {
  // heat case: int (Lu) u = -int |grad u|^2 in closed form for a space-time bump
  const double a = 1.0, b = 1.0;
  const auto u = make_gaussian_bump(a, Vector::Zero(1), b, 5.0);
  const double pi = std::numbers::pi;
  const double expected = -4 * a * a * std::sqrt(pi) / (2 * std::pow(2 * a, 1.5)) * std::sqrt(pi / (2 * b));
  const auto rep = verify_dissipativity(single(u), GeneralCoefficients::heat(1, 0.0), 2.0, small_options());
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.worst, expected, 1e-6);
  const auto zero = verify_dissipativity(single(make_constant(1, 0.0)), GeneralCoefficients::heat(1, 0.0), 2.0,
                                         small_options());
  EXPECT_EQ(zero.worst, 0.0);
}

TEST(Estimates, DissipativitySignViolation) {
  const auto gc = GeneralCoefficients::from_json(
      nlohmann::json::parse(R"js({"N": 1, "a": "1", "F": ["-2*x1"], "V": "0", "W": "1"})js"));
  const auto rep = verify_dissipativity(bump_corpus(1, 2, 1), gc, 2.0, small_options());
  EXPECT_FALSE(rep.pass);
  EXPECT_LT(rep.extra["sign_condition"]["min"].get<double>(), 0.0);
}

TEST(Estimates, WeightedGradientBoundedWeight) {
  // W <= w_max everywhere: ||W^{1/2} grad u||_p <= w_max^{1/2} ||grad u||_p
  const double wmax = 2.0;
  const auto W = [](double, const Vector& x) { return 1.0 + 1.0 / (1.0 + x[0] * x[0]); };
  const EstimateOptions opt = small_options();
  const Corpus corpus = bump_corpus(1, 4, 9);
  const auto rep = verify_weighted_gradient(corpus, W, 2.0, {1.0, 0.5}, opt);
  EXPECT_TRUE(rep.pass);
  ASSERT_TRUE(rep.extra.contains("alpha_table"));
  ASSERT_EQ(rep.rows.size(), corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& fn = *corpus[i].fn;
    const double grad =
        lp_norm(GridFunction::sample(opt.grid, [&](double s, const Vector& x) { return fn.grad(s, x).norm(); }), 2.0);
    EXPECT_LE(rep.rows[i].values["weighted_grad"].get<double>(), std::sqrt(wmax) * grad * (1 + 1e-9));
  }
  EXPECT_THROW(verify_weighted_gradient(bump_corpus(1, 1, 9), [](double, const Vector&) { return -1.0; }, 2.0,
                                        {1.0}, opt),
               PreconditionError);
}

TEST(Estimates, AprioriRejectsLargeBeta) {
  auto gc = GeneralCoefficients::heat(1, 1.0);
  gc.declared.beta = 4.0;
  gc.declared.theta = 2.0 / 3.0;
  EXPECT_THROW(verify_apriori(bump_corpus(1, 2, 1), gc, 2.0, small_options()), PreconditionError);
}

TEST(Estimates, L1RequiresLaplacian) {
  const auto gc = GeneralCoefficients::from_json(nlohmann::json::parse(R"js({"N": 1, "a": "2", "V": "1", "W": "1"})js"));
  EXPECT_THROW(verify_L1_and_sup(bump_corpus(1, 2, 1), gc, small_options()), PreconditionError);
}
