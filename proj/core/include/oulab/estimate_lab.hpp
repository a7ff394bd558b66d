#pragma once

#include "oulab/grid_function.hpp"
#include "oulab/report.hpp"
#include "oulab/test_functions.hpp"
#include "oulab/transform.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace oulab {

/// Measures entering a grid norm: the interior block actually summed and the
/// full grid extent it stands in for.
struct NormInfo {
  double interior_measure = 0.0;
  double full_measure = 0.0;
};

/// Riemann-sum L^p norm over interior nodes (first/last slices and boundary
/// nodes excluded); p = inf gives the max over those nodes.
double lp_norm(const GridFunction& u, double p, NormInfo* info = nullptr);

/// Central differences in x (second-order one-sided on boundary nodes).
std::vector<GridFunction> grad_x(const GridFunction& u);

/// (Delta - D_s) u with central stencils, second-order one-sided at the
/// window ends and on boundary nodes.
GridFunction heat_op(const GridFunction& u);

/// Grid with every step halved (same window and box).
GridSpec refine(const GridSpec& g);

struct InequalityReport {
  struct Row {
    std::string id;
    double value = 0.0;
    ojson values = ojson::object();
  };

  std::string id;
  int corpus_size = 0;
  int skipped = 0;
  double worst = 0.0;  // worst ratio / constant on the base grid
  std::string witness_id;
  ojson witness_params;
  double fine_worst = 0.0;  // the same on the refined grid
  double drift = 0.0;       // |fine - base| / |base|
  double drift_tol = 0.05;
  std::optional<double> ceiling;
  bool pass = false;
  std::vector<std::string> notes;
  ojson extra = ojson::object();
  std::vector<Row> rows;

  [[nodiscard]] ojson to_json() const;
  /// One row per corpus member: inequality,id,value.
  void write_csv(std::ostream& os, bool header = true) const;
};

struct EstimateOptions {
  GridSpec grid;
  double drift_tol = 0.05;
  /// Asserted bound on |u| over the boundary nodes of the grid.
  double tail_tol = 1e-10;
};

/// Window [0,10], box [-6,6]^N, tau = 0.02, h = 0.05 (N=1).
EstimateOptions default_estimate_options(int n);

/// R(u) = ||grad u||_p / (||(Delta - D_s)u||_p^{1/2} ||u||_p^{1/2}) with
/// finite differences; stability under refinement and under
/// u -> u(lambda^2 s, lambda x).
InequalityReport verify_interpolation(const Corpus& corpus, double p, const EstimateOptions& opt,
                                      double scale_lambda = 2.0, double scale_tol = 0.02);

/// Smallest alpha(eps) with ||W^{1/2} grad u|| <= eps ||(Delta-D_s)u|| + (alpha/eps)||W u||
/// over the corpus; reports sup_eps alpha(eps).
InequalityReport verify_weighted_gradient(const Corpus& corpus, const GeneralCoefficients::ScalarField& W, double p,
                                          const std::vector<double>& epsilons, const EstimateOptions& opt);

/// Empirical C_p of the two-sided a priori estimate. Throws PreconditionError
/// when (A1)-(A5) or the smallness condition fail.
InequalityReport verify_apriori(const Corpus& corpus, const GeneralCoefficients& gc, double p,
                                const EstimateOptions& opt);

/// int (L u) u |u|^{p-2} <= tol for every member; the sign condition
/// V + div F / p >= 0 is checked first and reported with a witness.
InequalityReport verify_dissipativity(const Corpus& corpus, const GeneralCoefficients& gc, double p,
                                      const EstimateOptions& opt, double tol = 1e-6);

/// (1 - theta)||W u||_1 <= ||L u||_1 and the two-sided sup-norm estimate
/// with ||u||_{D,inf} = max(||(Delta - D_s)u||_inf, ||V u||_inf).
/// Requires a = I (PreconditionError otherwise) and theta < 1.
InequalityReport verify_L1_and_sup(const Corpus& corpus, const GeneralCoefficients& gc, const EstimateOptions& opt);

}  // namespace oulab
