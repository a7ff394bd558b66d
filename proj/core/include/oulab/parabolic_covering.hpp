#pragma once

#include "oulab/report.hpp"
#include "oulab/types.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace oulab {

/// d((t,x),(s,y)) = max(|t-s|^{1/2}, |x-y|).
double pdist(double t, const Vector& x, double s, const Vector& y);

/// (s0 - r^2, s0 + r^2) x B(x0, r), the open d-ball of radius r.
struct ParabolicBall {
  double s0 = 0.0;
  Vector x0;
  double r = 1.0;

  /// Membership via the cylinder description.
  [[nodiscard]] bool contains(double s, const Vector& x) const;
  /// Membership via pdist < r.
  [[nodiscard]] bool contains_metric(double s, const Vector& x) const;
  [[nodiscard]] ParabolicBall dilate(double lambda) const { return {s0, x0, lambda * r}; }
  /// Exact test for a common point of two open cylinders.
  [[nodiscard]] bool intersects(const ParabolicBall& o) const;
};

/// Compact region [window] x [box].
struct CoverRegion {
  TimeWindow window;
  Box box;
  [[nodiscard]] int dim() const { return box.dim(); }
};

/// rho > 0 with declared d-Lipschitz constant kappa and declared sup delta.
struct RadiusFunction {
  std::function<double(double, const Vector&)> rho;
  double kappa = 0.0;
  double delta = 1.0;
  std::string text;  // source expression, when built from one

  [[nodiscard]] double operator()(double s, const Vector& x) const { return rho(s, x); }
  /// Expression in s, x1..xN (x for N = 1).
  static RadiusFunction from_expression(const std::string& text, int n, double kappa, double delta);
};

struct OverlapBound {
  double ratio = 0.0;  // (k^2 l^2 + 2 k l (1 + 3 l) + 6 l + 1) / (1 - k l)^2
  double xi = 0.0;     // floor(ratio^(N+2))
  double zeta = 0.0;   // 2 xi + 2
};

/// Throws ParameterError when kappa * lambda >= 1.
OverlapBound overlap_bound(double kappa, double lambda, int n);

struct CoverBall {
  int annulus = 1;  // l
  int order = 1;    // selection order within the annulus
  ParabolicBall ball;
  int color = 0;    // 0 until partition_disjoint runs
};

struct Covering {
  std::vector<CoverBall> balls;
  CoverRegion region;
  double kappa = 0.0;
  double lambda = 1.0;
  double delta = 1.0;
  double omega = 0.0;  // annulus width, infinite when kappa = 0
  int annuli = 0;
  double cell_radius = 0.0;
  double ds = 0.0, dx = 0.0;  // candidate spacings
  std::size_t candidates = 0;

  [[nodiscard]] int dim() const { return region.dim(); }
  [[nodiscard]] ojson to_json() const;
  /// annulus,order,s0,x1..xN,r,color
  void write_csv(std::ostream& os) const;
};

struct CoverOptions {
  /// Candidate spacings; chosen from an estimate of min rho when unset.
  std::optional<double> ds, dx;
  std::size_t max_candidates = 5'000'000;
};

/// Annulus-by-annulus greedy covering of the region. A candidate counts as
/// covered once its whole grid cell lies in a selected ball, so the balls
/// cover the region itself and not only the candidate nodes.
/// Throws ParameterError (kappa lambda >= 1), ResolutionError (cell radius
/// above min rho / 4) and DeclarationError (rho above delta or not positive).
Covering greedy_cover(const RadiusFunction& rho, const CoverRegion& region, double lambda,
                      const CoverOptions& opt = {});

/// Coverage of seeded random probes and the overlap count of the
/// lambda-dilated balls against zeta.
CheckReport verify_cover(const Covering& cov, int probes = 2000, std::uint64_t seed = 7);

/// Greedy coloring in selection order within each annulus against the
/// lambda-dilated balls; odd and even annuli use separate palettes, so a
/// global color lies in 1..zeta. Throws TheoremViolationError when an
/// annulus needs more than xi + 1 colors.
Covering partition_disjoint(const Covering& cov, double lambda);

/// Balls with equal color, dilated by lambda, pairwise disjoint (all pairs).
CheckReport verify_coloring(const Covering& cov, double lambda);

/// Within each annulus: the 1/3-contracted balls are pairwise disjoint, centers
/// lie in the annulus, and i < j implies rho_i >= (3/4) rho_j.
CheckReport verify_step2(const Covering& cov);

struct LipschitzEstimate {
  double kappa_hat = 0.0;
  double s_a = 0.0, s_b = 0.0;
  Vector x_a, x_b;
  std::size_t pairs = 0;
  [[nodiscard]] ojson to_json() const;
};

/// max |rho(a) - rho(b)| / d(a,b) over all pairs of `samples` seeded points
/// plus one nearby partner per point. Throws DeclarationError naming the
/// pair when the estimate exceeds the declared kappa.
LipschitzEstimate lipschitz_estimate(const RadiusFunction& rho, const CoverRegion& region, int samples = 400,
                                     std::uint64_t seed = 11);

}  // namespace oulab
