#pragma once

#include "oulab/fundamental_solution.hpp"

#include <nlohmann/json.hpp>

namespace oulab {

struct HypothesisOptions {
  /// Smallest gap s - r entering the log-linear fits.
  double min_gap = 0.1;
  /// Coefficient of determination required of the decay fit.
  double r2_min = 0.99;
  double symmetry_tol = 1e-12;
};

/// Numerical certificate of the standing hypotheses over a time window.
struct HypothesisReport {
  TimeWindow window;
  int n_samples = 0;

  double eta0_hat = 0.0;   // min over samples of lambda_min(Q(s))
  double q_sup = 0.0;      // sup ||Q(s)||
  double b_sup = 0.0;      // sup ||B(s)||
  double dq_sup = 0.0;     // sup ||Q'(s)||
  double symmetry_defect = 0.0;

  // Decay: ||U(r,s)|| <= C0 exp(-omega (s-r)), r <= s.
  double C0_hat = 0.0;
  double omega_hat = 0.0;
  double decay_slope = 0.0;
  double decay_r2 = 0.0;

  // Growth: ||U(s,r)|| <= M0 exp(varpi (s-r)), r <= s.
  double M0_hat = 0.0;
  double varpi_hat = 0.0;
  double growth_r2 = 0.0;

  bool pass_i = false;    // bounded coefficients on the window
  bool pass_ii = false;   // uniform ellipticity
  bool pass_iii = false;  // exponential stability fit
  bool pass_growth = false;

  [[nodiscard]] bool all_pass() const { return pass_i && pass_ii && pass_iii && pass_growth; }
  [[nodiscard]] nlohmann::ordered_json to_json() const;
};

HypothesisReport check_hypotheses(const FundamentalSolution& fs, TimeWindow window, int n_samples,
                                  const HypothesisOptions& options = {});

HypothesisReport check_hypotheses(const CoefficientField& field, TimeWindow window, int n_samples,
                                  const HypothesisOptions& options = {});

/// Linear least squares y = a + b x with the coefficient of determination.
/// r2 is NaN when y has no variance.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Spectral norm.
double operator_norm(const Matrix& A);

}  // namespace oulab
