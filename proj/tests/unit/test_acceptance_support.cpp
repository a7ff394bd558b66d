#include "oulab/errors.hpp"
#include "oulab/verification/acceptance.hpp"

#include <gtest/gtest.h>

using namespace oulab::verification;

TEST(Seeds, DerivedStreamsDifferAndRepeat) {
  EXPECT_EQ(derive_seed(42, 3), derive_seed(42, 3));
  EXPECT_NE(derive_seed(42, 3), derive_seed(42, 4));
  EXPECT_NE(derive_seed(42, 3), derive_seed(43, 3));
}

TEST(Report, DeterministicPartHasNoTimings) {
  CriterionResult a{8, "x", true, 1.5, 2.0, {{"k", 1}}};
  CriterionResult b = a;
  b.seconds = 0.25;
  EXPECT_EQ(criteria_report({a}, 7).dump(), criteria_report({b}, 7).dump());
  EXPECT_TRUE(run_header({a}).contains("timestamp"));
}

TEST(Report, SummaryLine) {
  CriterionResult r{2, "invariant covariance", true, 0.5, 10.0, {}};
  EXPECT_EQ(summary_line(r).rfind("[PASS] criterion 2", 0), 0u);
  r.seconds = 11.0;
  EXPECT_EQ(summary_line(r).rfind("[FAIL]", 0), 0u);
}

TEST(Criteria, SmallnessCriterionRuns) {
  const auto r = run_criterion(8, kDefaultSeed);
  EXPECT_TRUE(r.pass) << r.details.dump();
  EXPECT_THROW(run_criterion(10, kDefaultSeed), oulab::Error);
}
