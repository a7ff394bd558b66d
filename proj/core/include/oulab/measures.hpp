#pragma once

#include "oulab/covariance.hpp"
#include "oulab/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace oulab {

/// Symmetric positive square root via eigen-decomposition.
Matrix spd_sqrt(const Matrix& S);

/// N(0, covariance) with a factorized precision.
class GaussianMeasure {
 public:
  explicit GaussianMeasure(const Matrix& covariance);

  [[nodiscard]] int dim() const { return static_cast<int>(cov_.rows()); }
  [[nodiscard]] const Matrix& covariance() const { return cov_; }
  [[nodiscard]] const Matrix& precision() const { return prec_; }
  [[nodiscard]] const Matrix& sqrt_covariance() const { return root_; }
  [[nodiscard]] double log_norm() const { return log_norm_; }

  [[nodiscard]] double log_density(const Vector& x) const;
  [[nodiscard]] double density(const Vector& x) const;

 private:
  Matrix cov_, prec_, root_;
  double log_norm_ = 0.0;
};

struct GaussOptions {
  int nodes = 40;             // Gauss-Hermite nodes per axis
  int tensor_max_dim = 3;     // above this, Monte Carlo
  int mc_samples = 200000;
  std::uint64_t seed = 20240611;
};

struct GaussIntegral {
  double value = 0.0;
  double std_error = 0.0;  // 0 for tensor quadrature
  bool monte_carlo = false;
};

/// int f(m + x) N(0, S)(dx) with S = root root^T.
GaussIntegral gaussian_expectation(const SpatialFunction& f, const Vector& mean, const Matrix& root,
                                   const GaussOptions& opt = {});
GaussIntegral integrate(const GaussianMeasure& m, const SpatialFunction& f, const GaussOptions& opt = {});

/// (int |f|^p dmu)^(1/p).
double lp_norm_mu(const SpatialFunction& f, const GaussianMeasure& m, double p, const GaussOptions& opt = {});

/// d nu = mu_s(dx) ds over a time window.
class SpaceTimeMeasure {
 public:
  SpaceTimeMeasure(const CovarianceFamily& family, TimeWindow window) : family_(&family), window_(window) {}

  [[nodiscard]] GaussianMeasure at(double s) const { return GaussianMeasure(family_->Qs(s)); }
  [[nodiscard]] const TimeWindow& window() const { return window_; }
  [[nodiscard]] const CovarianceFamily& family() const { return *family_; }

 private:
  const CovarianceFamily* family_;
  TimeWindow window_;
};

struct TimeQuadrature {
  int order = 8;
  double max_panel = 0.25;
  GaussOptions space;
};

/// int_a^b int F(s,x) mu_s(dx) ds with composite Gauss-Legendre in time.
double nu_integral(const SpaceTimeFunction& F, const SpaceTimeMeasure& nu, TimeWindow window,
                   const TimeQuadrature& q = {});

/// Seeded sampler x = Q^{1/2} z. Owns its generator; not shareable across threads.
class GaussianSampler {
 public:
  GaussianSampler(const GaussianMeasure& m, std::uint64_t seed) : root_(m.sqrt_covariance()), rng_(seed) {}
  std::vector<Vector> draw(int n);

 private:
  Matrix root_;
  std::mt19937_64 rng_;
};

std::vector<Vector> sample(const GaussianMeasure& m, int n, std::uint64_t seed);

/// Seed from the OULAB_SEED environment variable, or the fallback.
std::uint64_t seed_from_env(std::uint64_t fallback);

/// CSV rows (s, vec(Q_s), log det Q_s).
void write_measure_csv(std::ostream& os, const CovarianceFamily& family, const std::vector<double>& times);

}  // namespace oulab
