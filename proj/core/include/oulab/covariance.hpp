#pragma once

#include "oulab/fundamental_solution.hpp"
#include "oulab/hypotheses.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace oulab {

/// Symmetric part (A + A^T)/2.
Matrix symmetrize(const Matrix& A);

struct InvariantCovarianceResult {
  Matrix Qs;
  double horizon = 0.0;  // truncation time T
  double step = 0.0;     // accepted quadrature step
  double change = 0.0;   // change against the previous step halving
};

/// Q_s = int_s^inf U(s,xi) Q(xi) U(s,xi)^T dxi, truncated where the tail bound
/// C0^2 q_sup exp(-2 omega (T-s)) / (2 omega) drops below tol.
InvariantCovarianceResult invariant_covariance_detail(const FundamentalSolution& fs, const HypothesisReport& hyp,
                                                      double s, double tol);
Matrix invariant_covariance(const FundamentalSolution& fs, const HypothesisReport& hyp, double s, double tol);

/// Gaussian transition kernel of G_O(s,r): mean map E = U(r,s) and covariance
/// Sigma = int_r^s U(r,xi) Q(xi) U(r,xi)^T dxi.
struct TransitionKernel {
  double r = 0.0;
  double s = 0.0;
  Matrix E;
  Matrix Sigma;
};

TransitionKernel transition_covariance(const FundamentalSolution& fs, double r, double s);

/// Lazily evaluated invariant covariances on and around a window.
///
/// Nodes on [a,b] are linked by the exact backward recursion
///   Q_{s_k} = P_k + Y_k Q_{s_{k+1}} Y_k^T,  (Y_k, P_k) = kernel(s_k, s_{k+1}),
/// which contracts errors. Off-node times use one partial panel to the next node.
class CovarianceFamily {
 public:
  CovarianceFamily(std::shared_ptr<const FundamentalSolution> fs, HypothesisReport hyp, TimeWindow window,
                   double tol = 1e-11, double node_step = 0.125);

  [[nodiscard]] const FundamentalSolution& fs() const { return *fs_; }
  [[nodiscard]] const CoefficientField& field() const { return fs_->field(); }
  [[nodiscard]] const HypothesisReport& hypotheses() const { return hyp_; }
  [[nodiscard]] const TimeWindow& window() const { return window_; }
  [[nodiscard]] int dim() const { return fs_->dim(); }
  [[nodiscard]] double tolerance() const { return tol_; }
  /// Truncation horizon used for the top node.
  [[nodiscard]] double horizon() const { return horizon_; }

  [[nodiscard]] Matrix Qs(double s) const;
  [[nodiscard]] Matrix Qs_inverse(double s) const;
  /// D_s Q_s from the Lyapunov identity -Q(s) + B(s) Q_s + Q_s B(s)^T.
  [[nodiscard]] Matrix dQs(double s) const;
  [[nodiscard]] double log_det(double s) const;

 private:
  std::shared_ptr<const FundamentalSolution> fs_;
  HypothesisReport hyp_;
  TimeWindow window_;
  double tol_;
  double node_step_;
  double horizon_ = 0.0;
  std::vector<double> nodes_;
  std::vector<Matrix> node_values_;

  struct Cache {
    std::mutex mutex;
    std::map<double, Matrix> values;
  };
  std::shared_ptr<Cache> cache_;
};

struct CovarianceBounds {
  double C1 = 0.0;  // tightest sampled lower Rayleigh bound
  double C2 = 0.0;  // tightest sampled upper Rayleigh bound
  double proof_C1 = 0.0;  // eta0 / (2 M0^2 varpi)
  double proof_C2 = 0.0;  // C0^2 ||Q||_inf / (2 omega)
  double det_min = 0.0;
  double det_max = 0.0;
  int samples = 0;
};

/// Evaluates the proof constants from the hypothesis report and the empirical
/// extremes over sampled r; throws InternalConsistencyError if the former do
/// not envelope the latter (relative slack 1e-6).
CovarianceBounds covariance_bounds(const CovarianceFamily& family, TimeWindow window, int n_samples = 41);

/// CSV exports, 17 significant digits.
void write_covariance_csv(std::ostream& os, const CovarianceFamily& family, const std::vector<double>& times);
void write_kernel_csv(std::ostream& os, const FundamentalSolution& fs,
                      const std::vector<std::pair<double, double>>& pairs);

}  // namespace oulab
