#pragma once

#include "oulab/coefficient_field.hpp"
#include "oulab/types.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace oulab {

struct IntegratorOptions {
  /// Fixed RK4 step; 0 selects it by calibration.
  double step = 0.0;
  /// Relative change tolerated between a step and its half during calibration.
  double calibration_tol = 2e-11;
  double initial_step = 1.0 / 64.0;
  int max_halvings = 12;
  /// Span used for calibration when the field window is unbounded.
  double calibration_span = 6.0;
};

/// Result of integrating the augmented system
///   Y' = -Y B(xi), P' = Y Q(xi) Y^T,  Y(a) = I, P(a) = 0
/// from xi = a to xi = b >= a. Then Y = U(a,b) and P = int_a^b U(a,xi)Q(xi)U(a,xi)^T dxi.
struct KernelPanel {
  Matrix Y;
  Matrix P;
};

/// Classical RK4 for U(t,s), D_t U(t,s) = B(t)U(t,s), U(s,s) = I, in either
/// time direction. A span shorter than the step is taken as one reduced step.
Matrix integrate_fundamental(const CoefficientField& field, double t, double s, double h);

/// RK4 for the augmented system above on [a,b].
KernelPanel integrate_kernel(const CoefficientField& field, double a, double b, double h);

/// Fundamental solution with a calibrated step and a synchronized cache.
///
/// `U(t, s)` follows the usual two-time convention: it maps data at time s
/// to time t. For t < s it is the decaying direction under exponential stability.
class FundamentalSolution {
 public:
  explicit FundamentalSolution(CoefficientField field, IntegratorOptions options = {});

  [[nodiscard]] const CoefficientField& field() const { return field_; }
  [[nodiscard]] int dim() const { return field_.dim(); }
  [[nodiscard]] double step() const { return h_; }
  /// Relative difference between the two finest calibration runs.
  [[nodiscard]] double calibration_defect() const { return calibration_defect_; }

  [[nodiscard]] Matrix U(double t, double s) const;
  /// Panel on [a,b], a <= b, at the calibrated step.
  [[nodiscard]] KernelPanel kernel(double a, double b) const;

  void clear_cache() const;

 private:
  CoefficientField field_;
  double h_ = 0.0;
  double calibration_defect_ = 0.0;

  struct Cache {
    std::mutex mutex;
    std::map<std::pair<double, double>, Matrix> u;
    std::map<std::pair<double, double>, KernelPanel> kernel;
  };
  std::shared_ptr<Cache> cache_;
};

/// U(s,r): the solution operator from time r to time s.
Matrix propagate(const FundamentalSolution& fs, double r, double s);

}  // namespace oulab
