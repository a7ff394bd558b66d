#include "oulab/fundamental_solution.hpp"

#include "oulab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace oulab {

namespace {

constexpr std::size_t kCacheLimit = 1 << 16;

int step_count(double span, double h) {
  const double n = std::ceil(std::abs(span) / h - 1e-9);
  return std::max(1, static_cast<int>(n));
}

[[noreturn]] void blow_up(const char* what, double t, int k) {
  std::ostringstream os;
  os.precision(17);
  os << what << ": non-finite value at step " << k << " (time " << t << ")";
  throw IntegrationError(os.str());
}

void check_endpoint(const CoefficientField& field, double t) {
  const auto& w = field.window();
  if (!(t >= w.lo && t <= w.hi)) {
    std::ostringstream os;
    os.precision(17);
    os << "time " << t << " is outside the field window [" << w.lo << ", " << w.hi << "]";
    throw RangeError(os.str());
  }
}

}  // namespace

Matrix integrate_fundamental(const CoefficientField& field, double t, double s, double h) {
  check_endpoint(field, t);
  check_endpoint(field, s);
  const int n = field.dim();
  Matrix Y = Matrix::Identity(n, n);
  if (t == s) return Y;
  const int steps = step_count(t - s, h);
  const double k = (t - s) / steps;
  Matrix Q, B0, B1, B2;
  for (int i = 0; i < steps; ++i) {
    const double a = s + i * k;
    field.eval_unchecked(a, Q, B0);
    field.eval_unchecked(a + 0.5 * k, Q, B1);
    field.eval_unchecked(i + 1 == steps ? t : a + k, Q, B2);
    const Matrix k1 = B0 * Y;
    const Matrix k2 = B1 * (Y + 0.5 * k * k1);
    const Matrix k3 = B1 * (Y + 0.5 * k * k2);
    const Matrix k4 = B2 * (Y + k * k3);
    Y += (k / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!Y.allFinite()) blow_up("fundamental solution", a + k, i + 1);
  }
  return Y;
}

KernelPanel integrate_kernel(const CoefficientField& field, double a, double b, double h) {
  if (b < a) throw ArgumentError("kernel panel requires a <= b");
  check_endpoint(field, a);
  check_endpoint(field, b);
  const int n = field.dim();
  KernelPanel out{Matrix::Identity(n, n), Matrix::Zero(n, n)};
  if (a == b) return out;
  const int steps = step_count(b - a, h);
  const double k = (b - a) / steps;
  Matrix Q0, Q1, Q2, B0, B1, B2;
  Matrix& Y = out.Y;
  Matrix& P = out.P;
  for (int i = 0; i < steps; ++i) {
    const double x = a + i * k;
    field.eval_unchecked(x, Q0, B0);
    field.eval_unchecked(x + 0.5 * k, Q1, B1);
    field.eval_unchecked(i + 1 == steps ? b : x + k, Q2, B2);
    const Matrix y1 = Y;
    const Matrix ky1 = -y1 * B0;
    const Matrix y2 = Y + 0.5 * k * ky1;
    const Matrix ky2 = -y2 * B1;
    const Matrix y3 = Y + 0.5 * k * ky2;
    const Matrix ky3 = -y3 * B1;
    const Matrix y4 = Y + k * ky3;
    const Matrix ky4 = -y4 * B2;
    const Matrix kp1 = y1 * Q0 * y1.transpose();
    const Matrix kp2 = y2 * Q1 * y2.transpose();
    const Matrix kp3 = y3 * Q1 * y3.transpose();
    const Matrix kp4 = y4 * Q2 * y4.transpose();
    Y += (k / 6.0) * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4);
    P += (k / 6.0) * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4);
    if (!Y.allFinite() || !P.allFinite()) blow_up("transition kernel", x + k, i + 1);
  }
  P = 0.5 * (P + P.transpose()).eval();
  return out;
}

FundamentalSolution::FundamentalSolution(CoefficientField field, IntegratorOptions options)
    : field_(std::move(field)), cache_(std::make_shared<Cache>()) {
  if (options.step > 0.0) {
    h_ = options.step;
    return;
  }
  const auto& w = field_.window();
  double lo = std::isfinite(w.lo) ? w.lo : 0.0;
  double hi = std::isfinite(w.hi) ? w.hi : lo + options.calibration_span;
  hi = std::min(hi, lo + options.calibration_span);
  double h = options.initial_step;
  Matrix prev = integrate_fundamental(field_, hi, lo, h);
  calibration_defect_ = std::numeric_limits<double>::infinity();
  for (int k = 0; k < options.max_halvings; ++k) {
    h *= 0.5;
    Matrix next = integrate_fundamental(field_, hi, lo, h);
    calibration_defect_ = (next - prev).norm() / std::max(next.norm(), 1e-300);
    prev = std::move(next);
    if (calibration_defect_ <= options.calibration_tol) break;
  }
  h_ = h;
}

Matrix FundamentalSolution::U(double t, double s) const {
  if (t == s) {
    check_endpoint(field_, t);
    return Matrix::Identity(dim(), dim());
  }
  const auto key = std::make_pair(t, s);
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->u.find(key);
    if (it != cache_->u.end()) return it->second;
  }
  Matrix result = integrate_fundamental(field_, t, s, h_);
  std::lock_guard lock(cache_->mutex);
  if (cache_->u.size() >= kCacheLimit) cache_->u.clear();
  cache_->u.emplace(key, result);
  return result;
}

KernelPanel FundamentalSolution::kernel(double a, double b) const {
  const auto key = std::make_pair(a, b);
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->kernel.find(key);
    if (it != cache_->kernel.end()) return it->second;
  }
  KernelPanel result = integrate_kernel(field_, a, b, h_);
  std::lock_guard lock(cache_->mutex);
  if (cache_->kernel.size() >= kCacheLimit) cache_->kernel.clear();
  cache_->kernel.emplace(key, result);
  return result;
}

void FundamentalSolution::clear_cache() const {
  std::lock_guard lock(cache_->mutex);
  cache_->u.clear();
  cache_->kernel.clear();
}

Matrix propagate(const FundamentalSolution& fs, double r, double s) { return fs.U(s, r); }

}  // namespace oulab
