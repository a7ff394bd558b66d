#pragma once

#include "oulab/covariance.hpp"
#include "oulab/grid_function.hpp"
#include "oulab/measures.hpp"
#include "oulab/report.hpp"
#include "oulab/test_functions.hpp"

#include <optional>

namespace oulab {

/// Gauss-Hermite settings sized for the dimension: 80 nodes per axis for N=1,
/// 32 for N=2, 12 for N=3, Monte Carlo beyond.
GaussOptions default_gauss(int n);

/// G_O(s,r)phi(x) = int phi(U(r,s)x + y) N(0, Sigma(s,r))(dy), r <= s.
/// s == r returns phi(x) exactly.
double apply_G(const FundamentalSolution& fs, double r, double s, const SpatialFunction& phi, const Vector& x,
               const GaussOptions& opt);
double apply_G(const FundamentalSolution& fs, double r, double s, const SpatialFunction& phi, const Vector& x);

/// G_O(s,r)phi as a function; the kernel is factorized once.
SpatialFunction apply_G_function(const FundamentalSolution& fs, double r, double s, SpatialFunction phi,
                                 const GaussOptions& opt);
SpatialFunction apply_G_function(const FundamentalSolution& fs, double r, double s, SpatialFunction phi);

/// G_O(s,r)phi sampled on the spatial nodes of `grid` (its time axis is ignored;
/// the result is a single slice at time s).
GridFunction apply_G_grid(const FundamentalSolution& fs, double r, double s, const SpatialFunction& phi,
                          const GridSpec& grid, const GaussOptions& opt);

struct FdOptions {
  double tau = 0.01;
  double h = 0.1;
  /// Nodes next to the boundary (per axis) where the drift is upwinded.
  int boundary_layer = 2;
  /// Max-norm growth per step tolerated for bounded data.
  double growth_limit = 1.01;
  double solver_tol = 1e-12;
};

/// Crank-Nicolson for D_s u = 1/2 Tr(Q(s) D^2 u) - <B(s)x, grad u>, u(r) = phi,
/// on [r, s_end] x box. Dirichlet data: the far-field limit of phi when known,
/// otherwise phi transported along the mean, phi(U(r,s)x).
GridFunction fd_solve(const FundamentalSolution& fs, double r, double s_end, const SpatialFunction& phi,
                      std::optional<double> far_field, const Box& box, const FdOptions& opt = {});
GridFunction fd_solve(const FundamentalSolution& fs, double r, double s_end, const TestFunction& phi, const Box& box,
                      const FdOptions& opt = {});

/// Max over the central part of the box (each axis shrunk to `fraction` of its
/// width) of |apply_G - fd| on the final and middle slices of `fd`.
double kernel_fd_discrepancy(const FundamentalSolution& fs, const SpatialFunction& phi, const GridFunction& fd,
                             double fraction = 0.5);

/// Kernel vs. Crank-Nicolson at `opt` and at half steps; the observed order is
/// log2(coarse / fine).
CheckReport cross_validate(const FundamentalSolution& fs, double r, double s_end, const TestFunction& phi,
                           const Box& box, const FdOptions& opt = {}, double tol = 5e-3, double min_order = 1.8);

/// (T(t)f)(s) = G_O(s, s-t) f(s-t), lazily.
SpaceTimeFunction apply_T_function(const FundamentalSolution& fs, double t, SpaceTimeFunction f,
                                   const GaussOptions& opt);

/// Grid form: slice k becomes G_O(s_k, s_k - t) applied to slice k - t/tau,
/// interpolated with the given degree (1 preserves nonnegativity). Slices
/// without a retained source are flagged as dropped and left at zero.
GridFunction apply_T(const FundamentalSolution& fs, double t, const GridFunction& f, const GaussOptions& opt,
                     int degree = 3);
GridFunction apply_T(const FundamentalSolution& fs, double t, const GridFunction& f);

/// |int G_O(s,r)phi dmu_s - int phi dmu_r| against tol; details carry the
/// covariance identity defect ||U(r,s) Q_s U(r,s)^T + Sigma(s,r) - Q_r||.
CheckReport verify_invariance(const CovarianceFamily& family, double r, double s, const SpatialFunction& phi,
                              double tol = 1e-5);

/// ||G_O(s,r)phi||_{L^p(mu_s)} <= ||phi||_{L^p(mu_r)} + tol.
CheckReport verify_contraction(const CovarianceFamily& family, double r, double s, const SpatialFunction& phi,
                               double p, double tol = 1e-6);

/// Positivity of T(t)f on the nodes of `grid` (slices with s - t below the
/// window are skipped and counted) and nu-preservation
///   int_{a+t}^{b} int T(t)f dmu_s ds  vs  int_a^{b-t} int f dmu_s ds.
CheckReport verify_positivity_and_nu(const CovarianceFamily& family, TimeWindow window, double t,
                                     const SpaceTimeFunction& f, const GridSpec& grid, double nu_tol = 1e-6,
                                     double positivity_tol = 1e-10);

struct ResolventResult {
  GridFunction u;
  /// Max interior |D_s u - A_O u + lambda u - f| by central differences.
  double residual = 0.0;
  double sup_u = 0.0;
  double sup_f = 0.0;
  /// Slices whose history is shorter than the truncation length.
  int short_history_slices = 0;
  bool coverage_warning = false;
  double truncation = 0.0;
};

/// u(s) = int_{s-T}^{s} e^{-lambda(s-r)} G_O(s,r) f(r) dr over the stored
/// history (trapezoid rule on the time nodes), T = log(1e12) / lambda.
ResolventResult resolvent_solve(const FundamentalSolution& fs, double lambda, const GridFunction& f,
                                const GaussOptions& opt);
ResolventResult resolvent_solve(const FundamentalSolution& fs, double lambda, const GridFunction& f);

}  // namespace oulab
