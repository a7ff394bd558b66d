#pragma once

#include "oulab/coefficient_field.hpp"
#include "oulab/covariance.hpp"
#include "oulab/fundamental_solution.hpp"
#include "oulab/hypotheses.hpp"
#include "oulab/report.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace oulab::verification {

/// Field, fundamental solution, hypothesis certificate and covariance family
/// on one window.
struct FieldContext {
  std::string name;
  std::shared_ptr<const FundamentalSolution> fs;
  HypothesisReport hyp;
  std::shared_ptr<const CovarianceFamily> family;
};

FieldContext make_context(const CoefficientField& field, TimeWindow window = {0.0, 10.0}, int samples = 21);

/// Independent stream of a base seed.
std::uint64_t derive_seed(std::uint64_t base, int stream);

inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  ojson details = ojson::object();

  [[nodiscard]] bool within_budget() const { return seconds <= budget_seconds; }
};

/// Criteria 1..9; criterion 10 compares two complete runs and lives with
/// the callers that can launch them.
CriterionResult run_criterion(int id, std::uint64_t seed);
std::vector<CriterionResult> run_criteria(const std::vector<int>& ids, std::uint64_t seed);

/// Deterministic part of a run (no timings).
ojson criteria_report(const std::vector<CriterionResult>& results, std::uint64_t seed);
/// Timestamp and per-criterion wall times.
ojson run_header(const std::vector<CriterionResult>& results);

/// One line: "[PASS] criterion 3: ... (12.3 s / 120 s)".
std::string summary_line(const CriterionResult& r);

}  // namespace oulab::verification
