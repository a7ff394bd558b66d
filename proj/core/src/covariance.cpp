#include "oulab/covariance.hpp"

#include "oulab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace oulab {

Matrix symmetrize(const Matrix& A) { return 0.5 * (A + A.transpose()); }

namespace {

double tail_horizon(const HypothesisReport& hyp, double tol) {
  const double w = hyp.omega_hat;
  const double ratio = hyp.C0_hat * hyp.C0_hat * hyp.q_sup / (2.0 * w * tol);
  return ratio > 1.0 ? std::log(ratio) / (2.0 * w) : 0.0;
}

void require_stability(const HypothesisReport& hyp) {
  if (!hyp.pass_iii || !(hyp.omega_hat > 0.0)) throw PreconditionError("no exponential stability certified");
}

}  // namespace

InvariantCovarianceResult invariant_covariance_detail(const FundamentalSolution& fs, const HypothesisReport& hyp,
                                                      double s, double tol) {
  require_stability(hyp);
  if (!(tol > 0.0)) throw ArgumentError("invariant_covariance: tol must be positive");
  InvariantCovarianceResult out;
  out.horizon = s + tail_horizon(hyp, tol);
  double h = fs.step();
  Matrix prev = fs.kernel(s, out.horizon).P;
  out.change = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 6; ++k) {
    Matrix next = integrate_kernel(fs.field(), s, out.horizon, h / 2).P;
    out.change = (next - prev).cwiseAbs().maxCoeff();
    prev = std::move(next);
    h /= 2;
    if (out.change <= tol) break;
  }
  out.step = h;
  out.Qs = symmetrize(prev);
  return out;
}

Matrix invariant_covariance(const FundamentalSolution& fs, const HypothesisReport& hyp, double s, double tol) {
  return invariant_covariance_detail(fs, hyp, s, tol).Qs;
}

TransitionKernel transition_covariance(const FundamentalSolution& fs, double r, double s) {
  if (r > s) throw ArgumentError("transition_covariance requires r <= s");
  const KernelPanel panel = fs.kernel(r, s);
  return {r, s, panel.Y, symmetrize(panel.P)};
}

CovarianceFamily::CovarianceFamily(std::shared_ptr<const FundamentalSolution> fs, HypothesisReport hyp,
                                   TimeWindow window, double tol, double node_step)
    : fs_(std::move(fs)), hyp_(hyp), window_(window), tol_(tol), node_step_(node_step),
      cache_(std::make_shared<Cache>()) {
  require_stability(hyp_);
  if (!(window_.hi >= window_.lo)) throw ArgumentError("covariance family: empty window");
  const int n = std::max(1, static_cast<int>(std::ceil((window_.hi - window_.lo) / node_step_ - 1e-9)));
  for (int k = 0; k <= n; ++k) nodes_.push_back(window_.lo + (window_.hi - window_.lo) * k / n);
  node_values_.resize(nodes_.size());
  const auto top = invariant_covariance_detail(*fs_, hyp_, nodes_.back(), tol_);
  horizon_ = top.horizon;
  node_values_.back() = top.Qs;
  for (std::size_t k = nodes_.size() - 1; k-- > 0;) {
    const KernelPanel p = fs_->kernel(nodes_[k], nodes_[k + 1]);
    node_values_[k] = symmetrize(p.P + p.Y * node_values_[k + 1] * p.Y.transpose());
  }
}

Matrix CovarianceFamily::Qs(double s) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), s);
  if (it != nodes_.end() && *it == s) return node_values_[static_cast<std::size_t>(it - nodes_.begin())];
  {
    std::lock_guard lock(cache_->mutex);
    auto c = cache_->values.find(s);
    if (c != cache_->values.end()) return c->second;
  }
  Matrix result;
  if (it == nodes_.end()) {
    result = invariant_covariance(*fs_, hyp_, s, tol_);
  } else {
    const auto k = static_cast<std::size_t>(it - nodes_.begin());
    const KernelPanel p = fs_->kernel(s, nodes_[k]);
    result = symmetrize(p.P + p.Y * node_values_[k] * p.Y.transpose());
  }
  std::lock_guard lock(cache_->mutex);
  if (cache_->values.size() > (1u << 16)) cache_->values.clear();
  cache_->values.emplace(s, result);
  return result;
}

Matrix CovarianceFamily::Qs_inverse(double s) const {
  const Matrix Q = Qs(s);
  return symmetrize(Q.llt().solve(Matrix::Identity(Q.rows(), Q.cols())));
}

Matrix CovarianceFamily::dQs(double s) const {
  const Matrix Q = Qs(s);
  const Matrix B = field().B(s);
  return -field().Q(s) + B * Q + Q * B.transpose();
}

double CovarianceFamily::log_det(double s) const {
  const Eigen::LLT<Matrix> llt(Qs(s));
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

CovarianceBounds covariance_bounds(const CovarianceFamily& family, TimeWindow window, int n_samples) {
  const auto& hyp = family.hypotheses();
  if (!hyp.all_pass()) throw PreconditionError("covariance_bounds needs a hypothesis report with all passes");
  if (n_samples < 1) throw ArgumentError("covariance_bounds: n_samples must be positive");
  CovarianceBounds b;
  b.samples = n_samples;
  b.C1 = std::numeric_limits<double>::infinity();
  b.C2 = 0.0;
  b.det_min = std::numeric_limits<double>::infinity();
  b.det_max = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const double r = n_samples == 1 ? window.lo : window.lo + (window.hi - window.lo) * k / (n_samples - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(family.Qs(r), Eigen::EigenvaluesOnly);
    b.C1 = std::min(b.C1, eig.eigenvalues().minCoeff());
    b.C2 = std::max(b.C2, eig.eigenvalues().maxCoeff());
    const double det = eig.eigenvalues().prod();
    b.det_min = std::min(b.det_min, det);
    b.det_max = std::max(b.det_max, det);
  }
  b.proof_C2 = hyp.C0_hat * hyp.C0_hat * hyp.q_sup / (2.0 * hyp.omega_hat);
  b.proof_C1 = hyp.eta0_hat / (2.0 * hyp.M0_hat * hyp.M0_hat * hyp.varpi_hat);
  constexpr double slack = 1e-6;
  if (b.proof_C1 > b.C1 * (1.0 + slack) || b.proof_C2 < b.C2 * (1.0 - slack)) {
    std::ostringstream os;
    os.precision(10);
    os << "proof constants [" << b.proof_C1 << ", " << b.proof_C2 << "] do not envelope the sampled spectrum ["
       << b.C1 << ", " << b.C2 << "]; the stability fit is unreliable on this window";
    throw InternalConsistencyError(os.str());
  }
  return b;
}

namespace {

void write_vec(std::ostream& os, const Matrix& M) {
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) os << ',' << M(i, j);
}

void write_vec_header(std::ostream& os, const char* prefix, int n) {
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) os << ',' << prefix << i << j;
}

}  // namespace

void write_covariance_csv(std::ostream& os, const CovarianceFamily& family, const std::vector<double>& times) {
  const int n = family.dim();
  const auto old = os.precision(17);
  os << 's';
  write_vec_header(os, "Qs_", n);
  os << ",logdet\n";
  for (double s : times) {
    os << s;
    write_vec(os, family.Qs(s));
    os << ',' << family.log_det(s) << '\n';
  }
  os.precision(old);
}

void write_kernel_csv(std::ostream& os, const FundamentalSolution& fs,
                      const std::vector<std::pair<double, double>>& pairs) {
  const int n = fs.dim();
  const auto old = os.precision(17);
  os << "r,s";
  write_vec_header(os, "U_", n);
  write_vec_header(os, "Sigma_", n);
  os << '\n';
  for (const auto& [r, s] : pairs) {
    const TransitionKernel k = transition_covariance(fs, r, s);
    os << r << ',' << s;
    write_vec(os, fs.U(s, r));
    write_vec(os, k.Sigma);
    os << '\n';
  }
  os.precision(old);
}

}  // namespace oulab
