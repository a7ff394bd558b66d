#include "oulab/measures.hpp"

#include "oulab/errors.hpp"
#include "oulab/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdlib>
#include <string>

namespace oulab {

Matrix spd_sqrt(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(S));
  Vector ev = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return symmetrize(eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose());
}

GaussianMeasure::GaussianMeasure(const Matrix& covariance) : cov_(symmetrize(covariance)) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_);
  if (eig.eigenvalues().minCoeff() <= 0.0) throw KernelDegeneracyError("Gaussian measure: covariance is not SPD");
  const Matrix& V = eig.eigenvectors();
  const Vector& ev = eig.eigenvalues();
  prec_ = symmetrize(V * ev.cwiseInverse().asDiagonal() * V.transpose());
  root_ = symmetrize(V * ev.cwiseSqrt().asDiagonal() * V.transpose());
  log_norm_ = -0.5 * dim() * std::log(2.0 * M_PI) - 0.5 * ev.array().log().sum();
}

double GaussianMeasure::log_density(const Vector& x) const { return log_norm_ - 0.5 * x.dot(prec_ * x); }

double GaussianMeasure::density(const Vector& x) const { return std::exp(log_density(x)); }

GaussIntegral gaussian_expectation(const SpatialFunction& f, const Vector& mean, const Matrix& root,
                                   const GaussOptions& opt) {
  const int n = static_cast<int>(mean.size());
  GaussIntegral out;
  if (n <= opt.tensor_max_dim) {
    const auto& rule = gauss_hermite(opt.nodes);
    const int m = static_cast<int>(rule.nodes.size());
    const double scale = std::pow(M_PI, -0.5 * n);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    Vector z(n), x(n);
    double total = 0.0;
    for (;;) {
      double w = scale;
      for (int i = 0; i < n; ++i) {
        z[i] = M_SQRT2 * rule.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        w *= rule.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      }
      x = mean + root * z;
      total += w * f(x);
      int i = 0;
      while (i < n && ++idx[static_cast<std::size_t>(i)] == m) idx[static_cast<std::size_t>(i++)] = 0;
      if (i == n) break;
    }
    out.value = total;
    return out;
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  double sum = 0.0, sum2 = 0.0;
  Vector z(n);
  for (int k = 0; k < opt.mc_samples; ++k) {
    for (int i = 0; i < n; ++i) z[i] = normal(rng);
    const double v = f(mean + root * z);
    sum += v;
    sum2 += v * v;
  }
  const double N = opt.mc_samples;
  out.value = sum / N;
  out.std_error = std::sqrt(std::max(0.0, sum2 / N - out.value * out.value) / N);
  out.monte_carlo = true;
  return out;
}

GaussIntegral integrate(const GaussianMeasure& m, const SpatialFunction& f, const GaussOptions& opt) {
  return gaussian_expectation(f, Vector::Zero(m.dim()), m.sqrt_covariance(), opt);
}

double lp_norm_mu(const SpatialFunction& f, const GaussianMeasure& m, double p, const GaussOptions& opt) {
  if (!(p >= 1.0)) throw ArgumentError("lp_norm_mu: p must be at least 1");
  const auto r = integrate(m, [&](const Vector& x) { return std::pow(std::abs(f(x)), p); }, opt);
  return std::pow(std::max(0.0, r.value), 1.0 / p);
}

double nu_integral(const SpaceTimeFunction& F, const SpaceTimeMeasure& nu, TimeWindow window,
                   const TimeQuadrature& q) {
  return composite_legendre(
      [&](double s) {
        const GaussianMeasure m = nu.at(s);
        return integrate(m, [&](const Vector& x) { return F(s, x); }, q.space).value;
      },
      window.lo, window.hi, q.order, q.max_panel);
}

std::vector<Vector> GaussianSampler::draw(int n) {
  if (n < 1) throw ArgumentError("sample: n must be at least 1");
  std::normal_distribution<double> normal;
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(n));
  const auto d = root_.rows();
  Vector z(d);
  for (int k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = normal(rng_);
    out.emplace_back(root_ * z);
  }
  return out;
}

std::vector<Vector> sample(const GaussianMeasure& m, int n, std::uint64_t seed) {
  GaussianSampler sampler(m, seed);
  return sampler.draw(n);
}

std::uint64_t seed_from_env(std::uint64_t fallback) {
  if (const char* env = std::getenv("OULAB_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw InputError(std::string("OULAB_SEED is not an unsigned integer: ") + env);
    }
  }
  return fallback;
}

void write_measure_csv(std::ostream& os, const CovarianceFamily& family, const std::vector<double>& times) {
  write_covariance_csv(os, family, times);
}

}  // namespace oulab
