#include "oulab/errors.hpp"
#include "oulab/parabolic_covering.hpp"
#include "oulab/verification/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace oulab;

namespace {

Vector v(std::initializer_list<double> e) {
  Vector x(static_cast<int>(e.size()));
  int i = 0;
  for (double d : e) x[i++] = d;
  return x;
}

const char* kDecaying = "1/(1+0.2*max(sqrt(abs(s)),abs(x)))";

}  // namespace

TEST(Metric, Examples) {
  EXPECT_DOUBLE_EQ(pdist(0.0, v({0.0}), 4.0, v({1.0})), 2.0);
  EXPECT_EQ(pdist(1.0, v({2.0}), 1.0, v({2.0})), 0.0);
  EXPECT_DOUBLE_EQ(pdist(0.0, v({0.0, 0.0}), 0.01, v({0.3, 0.4})), 0.5);
}

TEST(Ball, CylinderMatchesMetric) {
  const ParabolicBall b{1.0, v({0.5}), 0.8};
  for (double s = -0.5; s <= 2.5; s += 0.05)
    for (double x = -0.5; x <= 1.5; x += 0.05) EXPECT_EQ(b.contains(s, v({x})), b.contains_metric(s, v({x})));
  EXPECT_TRUE(b.intersects(ParabolicBall{1.5, v({1.2}), 0.3}));
  EXPECT_FALSE(b.intersects(ParabolicBall{5.0, v({0.5}), 0.3}));
}

TEST(OverlapBound, ExactIntegers) {
  const auto half = overlap_bound(0.5, 1.0, 1);
  EXPECT_DOUBLE_EQ(half.ratio, 45.0);
  EXPECT_EQ(half.xi, oracle::kXiHalf);
  EXPECT_EQ(half.zeta, oracle::kZetaHalf);
  const auto quarter = overlap_bound(0.25, 1.0, 1);
  EXPECT_EQ(quarter.xi, oracle::kXiQuarter);
  EXPECT_EQ(quarter.zeta, oracle::kZetaQuarter);
  for (double lambda : {1.0, 2.5}) EXPECT_DOUBLE_EQ(overlap_bound(0.0, lambda, 2).ratio, 6 * lambda + 1);
  EXPECT_THROW(overlap_bound(0.5, 2.0, 1), ParameterError);
}

TEST(GreedyCover, ConstantRadius) {
  const auto rho = RadiusFunction::from_expression("1", 1, 0.0, 1.0);
  const Covering cov = greedy_cover(rho, {{0, 10}, Box::cube(1, 0, 10)}, 1.0);
  EXPECT_GT(cov.balls.size(), 0u);
  const auto rep = verify_cover(cov);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.details["coverage"].get<double>(), 1.0);
}

TEST(GreedyCover, SinglePoint) {
  const auto rho = RadiusFunction::from_expression("1", 1, 0.0, 1.0);
  const Covering cov = greedy_cover(rho, {{2, 2}, Box::cube(1, 3, 3)}, 1.0);
  EXPECT_EQ(cov.balls.size(), 1u);
  EXPECT_TRUE(verify_cover(cov).pass);
}

TEST(GreedyCover, DecayingRadiusFullPipeline) {
  const auto rho = RadiusFunction::from_expression(kDecaying, 1, 0.2, 1.0);
  const CoverRegion region{{0, 10}, Box::cube(1, 0, 10)};
  const Covering cov = greedy_cover(rho, region, 1.0);
  const auto vc = verify_cover(cov);
  EXPECT_TRUE(vc.pass) << vc.to_json().dump();
  EXPECT_LE(vc.details["max_overlap"].get<double>(), overlap_bound(0.2, 1.0, 1).zeta);
  EXPECT_TRUE(verify_step2(cov).pass);
  const Covering colored = partition_disjoint(cov, 1.0);
  EXPECT_TRUE(verify_coloring(colored, 1.0).pass);
  std::ostringstream os;
  colored.write_csv(os);
  EXPECT_EQ(os.str().substr(0, 22), "annulus,order,s0,x1,r,");
}

TEST(GreedyCover, DeclarationAndResolutionErrors) {
  const CoverRegion region{{0, 1}, Box::cube(1, 0, 1)};
  EXPECT_THROW(greedy_cover(RadiusFunction::from_expression("2", 1, 0.0, 1.0), region, 1.0), DeclarationError);
  EXPECT_THROW(greedy_cover(RadiusFunction::from_expression("1", 1, 0.0, 1.0), region, 1.0, {0.5, 0.5}),
               ResolutionError);
}

TEST(VerifyCover, EmptyCoveringFails) {
  Covering empty;
  empty.region = {{0, 1}, Box::cube(1, 0, 1)};
  EXPECT_FALSE(verify_cover(empty).pass);
}

TEST(VerifyCover, SingleBallOverlapOne) {
  Covering one;
  one.region = {{0, 0}, Box::cube(1, 0, 0)};
  one.balls.push_back({1, 1, ParabolicBall{0.0, v({0.0}), 1.0}, 1});
  const auto rep = verify_cover(one);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.details["max_overlap"].get<double>(), 1.0);
}

TEST(Coloring, SeparatedBallsShareColor) {
  Covering c;
  c.region = {{0, 0}, Box::cube(1, 0, 30)};
  for (int i = 0; i < 5; ++i) c.balls.push_back({1, i + 1, ParabolicBall{0.0, v({6.0 * i}), 1.0}, 0});
  const Covering col = partition_disjoint(c, 1.0);
  for (const auto& b : col.balls) EXPECT_EQ(b.color, col.balls.front().color);
}

TEST(Coloring, IdenticalBallsSplit) {
  Covering c;
  c.region = {{0, 0}, Box::cube(1, 0, 0)};
  c.balls.push_back({1, 1, ParabolicBall{0.0, v({0.0}), 1.0}, 0});
  c.balls.push_back({1, 2, ParabolicBall{0.0, v({0.0}), 1.0}, 0});
  const Covering col = partition_disjoint(c, 1.0);
  EXPECT_NE(col.balls[0].color, col.balls[1].color);
  EXPECT_TRUE(verify_coloring(col, 1.0).pass);
}

TEST(Lipschitz, ConstantAndLinearRadius) {
  const CoverRegion region{{0, 10}, Box::cube(1, -5, 5)};
  EXPECT_EQ(lipschitz_estimate(RadiusFunction::from_expression("0.7", 1, 0.0, 1.0), region).kappa_hat, 0.0);
  const auto lin = RadiusFunction::from_expression("1 + 0.3*max(sqrt(abs(s)),abs(x))", 1, 0.3, 10.0);
  const auto est = lipschitz_estimate(lin, region);
  EXPECT_LE(est.kappa_hat, 0.3 + 1e-9);
  EXPECT_GT(est.kappa_hat, 0.25);
  const auto under = RadiusFunction::from_expression("1 + 0.3*max(sqrt(abs(s)),abs(x))", 1, 0.1, 10.0);
  EXPECT_THROW(lipschitz_estimate(under, region), DeclarationError);
}
