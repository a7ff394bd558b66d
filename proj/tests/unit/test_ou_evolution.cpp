#include "oulab/errors.hpp"
#include "oulab/ou_evolution.hpp"
#include "oulab/test_functions.hpp"
#include "oulab/verification/acceptance.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace oulab;
using verification::make_context;

namespace {

Vector pt(double x) { return Vector::Constant(1, x); }

}  // namespace

TEST(ApplyG, MehlerClosedForms) {
  const FundamentalSolution fs(fixtures::benchmark());
  const double r = 0.4, s = 1.9, e = std::exp(-(s - r));
  for (double x : {-2.0, 0.0, 1.3}) {
    EXPECT_NEAR(apply_G(fs, r, s, [](const Vector& y) { return y[0]; }, pt(x)), e * x, 1e-10);
    EXPECT_NEAR(apply_G(fs, r, s, [](const Vector&) { return 1.0; }, pt(x)), 1.0, 1e-12);
    EXPECT_NEAR(apply_G(fs, r, s, [](const Vector& y) { return y[0] * y[0]; }, pt(x)), e * e * x * x + (1 - e * e),
                1e-10);
  }
  EXPECT_THROW(apply_G(fs, 2.0, 1.0, [](const Vector&) { return 1.0; }, pt(0.0)), Error);
}

TEST(FdSolve, LinearDataDecays) {
  const FundamentalSolution fs(fixtures::benchmark());
  const auto phi = make_linear(Vector::Ones(1));
  const GridFunction u = fd_solve(fs, 0.0, 1.0, *phi, Box::cube(1, -8, 8));
  const auto& g = u.spec();
  double worst = 0.0;
  for (std::size_t j = 0; j < g.slice_size(); ++j) {
    const double x = g.point(j)[0];
    if (std::abs(x) <= 4.0) worst = std::max(worst, std::abs(u.at(g.nt - 1, j) - std::exp(-1.0) * x));
  }
  EXPECT_LE(worst, 5e-3);
}

TEST(FdSolve, ConstantsAreExactAndZeroSpanReturnsData) {
  const FundamentalSolution fs(fixtures::benchmark());
  const auto one = make_constant(1, 1.0);
  const GridFunction u = fd_solve(fs, 0.0, 1.0, *one, Box::cube(1, -4, 4));
  for (double v : u.values()) EXPECT_NEAR(v, 1.0, 1e-10);
  const auto bump = make_gaussian_bump(1.0, Vector::Zero(1));
  const GridFunction w = fd_solve(fs, 0.5, 0.5, *bump, Box::cube(1, -4, 4));
  ASSERT_EQ(w.spec().nt, 1);
  for (std::size_t j = 0; j < w.spec().slice_size(); ++j)
    EXPECT_EQ(w.at(0, j), bump->value(0.5, w.spec().point(j)));
}

TEST(ApplyT, ZeroShiftAndDefinition) {
  const FundamentalSolution fs(fixtures::benchmark());
  const auto phi = make_gaussian_bump(0.8, Vector::Zero(1));
  // wide box: slices are clamped outside it
  const GridSpec g = GridSpec::uniform({0.0, 3.0}, 0.25, Box::cube(1, -6, 6), 0.05);
  const GridFunction f = GridFunction::sample(g, [&](double, const Vector& x) { return phi->value(0, x); });
  const GridFunction t0 = apply_T(fs, 0.0, f);
  for (std::size_t i = 0; i < f.values().size(); ++i) EXPECT_NEAR(t0.values()[i], f.values()[i], 1e-14);

  const GridFunction t1 = apply_T(fs, 1.0, f);
  for (int k = 0; k < g.nt; ++k) {
    if (!t1.retained(k)) continue;
    const double s = g.time(k);
    for (std::size_t j = 0; j < g.slice_size(); j += 5)
      if (std::abs(g.point(j)[0]) <= 2.0) EXPECT_NEAR(t1.at(k, j), apply_G(fs, s - 1.0, s, phi->slice(0), g.point(j)), 1e-6);
  }
}

TEST(ApplyT, SemigroupLaw) {
  const FundamentalSolution fs(fixtures::benchmark());
  const auto phi = make_gaussian_bump(0.5, Vector::Zero(1), 0.3, 1.5);
  const GridSpec g = GridSpec::uniform({0.0, 3.0}, 0.25, Box::cube(1, -7, 7), 0.1);
  const GridFunction f = GridFunction::sample(g, phi->function());
  const GridFunction a = apply_T(fs, 1.0, f);
  const GridFunction b = apply_T(fs, 0.5, apply_T(fs, 0.5, f));
  double worst = 0.0;
  for (int k = 0; k < g.nt; ++k) {
    if (!a.retained(k) || !b.retained(k)) continue;
    for (std::size_t j = 0; j < g.slice_size(); ++j) {
      if (std::abs(g.point(j)[0]) > 2.0) continue;
      worst = std::max(worst, std::abs(a.at(k, j) - b.at(k, j)));
    }
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Invariance, SecondMomentAndConstants) {
  const auto c = make_context(fixtures::benchmark());
  const auto sq = verify_invariance(*c.family, 0.5, 3.0, [](const Vector& x) { return x[0] * x[0]; });
  EXPECT_LE(sq.defect, 1e-8);
  const auto cst = verify_invariance(*c.family, 0.5, 3.0, [](const Vector&) { return 2.5; });
  EXPECT_LE(cst.defect, 1e-13);
}

TEST(Invariance, NoncommutingField) {
  const auto c = make_context(fixtures::noncommuting());
  for (const auto& m : kernel_corpus(2, 4, 3)) {
    const auto rep = verify_invariance(*c.family, 1.0, 2.5, m.fn->slice(0));
    EXPECT_TRUE(rep.pass) << m.id << " " << rep.defect;
    EXPECT_LE(rep.details["covariance_identity_defect"].get<double>(), 1e-6);
  }
}

TEST(Contraction, LinearAndConstantData) {
  const auto c = make_context(fixtures::benchmark());
  const auto lin = verify_contraction(*c.family, 1.0, 2.0, [](const Vector& x) { return x[0]; }, 2.0);
  EXPECT_NEAR(lin.details["lhs"].get<double>(), std::exp(-1.0), 1e-8);
  EXPECT_NEAR(lin.details["rhs"].get<double>(), 1.0, 1e-8);
  for (double p : {1.0, 3.0}) {
    const auto one = verify_contraction(*c.family, 1.0, 2.0, [](const Vector&) { return 1.0; }, p);
    EXPECT_NEAR(one.defect, 0.0, 1e-12);
  }
}

TEST(PositivityAndNu, ConstantBumpAndNegativeData) {
  const auto c = make_context(fixtures::benchmark());
  const GridSpec g = GridSpec::uniform({0.0, 3.0}, 0.25, Box::cube(1, -3, 3), 0.25);
  const auto one = verify_positivity_and_nu(*c.family, {0.0, 3.0}, 1.0, [](double, const Vector&) { return 1.0; }, g);
  EXPECT_TRUE(one.pass);
  const auto bump = make_gaussian_bump(1.0, Vector::Zero(1), 0.5, 1.5);
  const auto b = verify_positivity_and_nu(*c.family, {0.0, 3.0}, 0.5, bump->function(), g);
  EXPECT_TRUE(b.pass);
  EXPECT_LE(b.defect, 1e-4);
  const auto neg = verify_positivity_and_nu(*c.family, {0.0, 3.0}, 0.5,
                                            [](double, const Vector& x) { return x[0] - 1.0; }, g);
  EXPECT_FALSE(neg.pass);
}

TEST(Resolvent, ZeroConstantAndContractivity) {
  const FundamentalSolution fs(fixtures::benchmark());
  const GridSpec g = GridSpec::uniform({0.0, 10.0}, 0.1, Box::cube(1, -3, 3), 0.25);
  const auto zero = resolvent_solve(fs, 1.0, GridFunction(g, 0.0));
  EXPECT_EQ(zero.u.max_abs(), 0.0);
  const auto bump = make_gaussian_bump(0.5, Vector::Zero(1), 0.2, 5.0);
  const GridFunction f = GridFunction::sample(g, bump->function());
  const auto r1 = resolvent_solve(fs, 1.0, f);
  const auto r2 = resolvent_solve(fs, 2.0, f);
  EXPECT_LE(r1.sup_u, r1.sup_f / 1.0 + 1e-6);
  EXPECT_LE(r2.sup_u, r2.sup_f / 2.0 + 1e-6);
  EXPECT_LE(r2.sup_u, r1.sup_u);
}

TEST(GridFunction, BinaryRoundTrip) {
  const GridSpec g = GridSpec::uniform({0.0, 1.0}, 0.5, Box::cube(2, -1, 1), 0.5);
  GridFunction f = GridFunction::sample(g, [](double s, const Vector& x) { return s + x[0] - 2 * x[1]; });
  f.set_retained(1, false);
  std::stringstream ss;
  f.write_binary(ss);
  const GridFunction h = GridFunction::read_binary(ss);
  EXPECT_EQ(h.values(), f.values());
  EXPECT_FALSE(h.retained(1));
  std::stringstream bad("NOPE");
  EXPECT_THROW(GridFunction::read_binary(bad), Error);
}
