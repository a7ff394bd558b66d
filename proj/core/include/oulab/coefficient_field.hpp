#pragma once

#include "oulab/expression.hpp"
#include "oulab/types.hpp"

#include <nlohmann/json.hpp>

#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace oulab {

enum class FieldKind { Constant, ClosedForm, Table };

std::string to_string(FieldKind kind);

/// Time-dependent coefficient pair (Q(s), B(s)) of the Ornstein-Uhlenbeck
/// operator, with the analytic time derivative of Q.
///
/// Immutable after construction; evaluation is re-entrant.
class CoefficientField {
 public:
  /// Constant coefficients, valid for every s.
  static CoefficientField constant(const Matrix& Q, const Matrix& B);

  /// Entry-wise expression strings in the variable "s".
  static CoefficientField closed_form(int n, const std::vector<std::string>& Q,
                                      const std::vector<std::string>& B,
                                      TimeWindow window = unbounded());

  /// Tabulated values, interpolated entry-wise by monotone cubic Hermite
  /// (Fritsch-Carlson) splines. The validity window is [times.front(), times.back()].
  static CoefficientField table(const std::vector<double>& times, const std::vector<Matrix>& Q,
                                const std::vector<Matrix>& B);

  static CoefficientField from_json(const nlohmann::json& spec);

  static TimeWindow unbounded() {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }

  [[nodiscard]] int dim() const { return n_; }
  [[nodiscard]] FieldKind kind() const { return kind_; }
  [[nodiscard]] const TimeWindow& window() const { return window_; }
  [[nodiscard]] const std::string& name() const { return name_; }
  CoefficientField& set_name(std::string name) {
    name_ = std::move(name);
    return *this;
  }

  [[nodiscard]] Matrix Q(double s) const;
  [[nodiscard]] Matrix B(double s) const;
  [[nodiscard]] Matrix dQ(double s) const;

  /// Q and B without the window check; used by the integrators after they
  /// have validated their own endpoints.
  void eval_unchecked(double s, Matrix& Q, Matrix& B) const;

  [[nodiscard]] nlohmann::json describe() const;

 private:
  struct Impl;
  CoefficientField(int n, FieldKind kind, TimeWindow window, std::shared_ptr<const Impl> impl);
  void check_time(double s) const;

  int n_ = 1;
  FieldKind kind_ = FieldKind::Constant;
  TimeWindow window_;
  std::string name_;
  std::shared_ptr<const Impl> impl_;
};

Matrix eval_Q(const CoefficientField& field, double s);
Matrix eval_B(const CoefficientField& field, double s);
Matrix eval_dQ(const CoefficientField& field, double s);

/// Reference fields used across the test and acceptance suites.
namespace fixtures {
/// N=1, Q=2, B=1. Q_s = 1 and U(s,r) = e^{s-r}.
CoefficientField benchmark();
/// N=2, Q=2I, B=I. Q_s = I.
CoefficientField isotropic2();
/// N=2, Q=2I, B(s) = [[2, sin s], [0, 2]].
CoefficientField noncommuting();
/// N=2 autonomous, B = [[2, 1], [0, 1]], Q = [[1, 0.3], [0.3, 2]].
CoefficientField autonomous_nonnormal();
/// Lookup by name: benchmark | iso2 | noncommuting | nonnormal.
CoefficientField by_name(const std::string& name);
}  // namespace fixtures

}  // namespace oulab
