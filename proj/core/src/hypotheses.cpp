#include "oulab/hypotheses.hpp"

#include "oulab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace oulab {

double operator_norm(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A.transpose() * A, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) {
    f.r2 = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) {
    f.r2 = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    ssr += e * e;
  }
  // Relative to the signal scale so that exactly linear data is not lost to rounding.
  if (syy <= 1e-24 * std::max(1.0, my * my) * n) {
    f.r2 = std::numeric_limits<double>::quiet_NaN();
  } else {
    f.r2 = 1.0 - ssr / syy;
  }
  return f;
}

HypothesisReport check_hypotheses(const FundamentalSolution& fs, TimeWindow window, int n_samples,
                                  const HypothesisOptions& options) {
  if (!(window.hi > window.lo)) throw ArgumentError("check_hypotheses: window must be nonempty");
  if (n_samples < 2) throw ArgumentError("check_hypotheses: n_samples must be at least 2");
  const auto& field = fs.field();
  HypothesisReport rep;
  rep.window = window;
  rep.n_samples = n_samples;
  rep.eta0_hat = std::numeric_limits<double>::infinity();

  std::vector<double> times(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k)
    times[static_cast<std::size_t>(k)] = window.lo + (window.hi - window.lo) * k / (n_samples - 1);

  for (double s : times) {
    const Matrix Q = field.Q(s);
    const Matrix B = field.B(s);
    const Matrix dQ = field.dQ(s);
    if (!Q.allFinite() || !B.allFinite() || !dQ.allFinite()) {
      std::ostringstream os;
      os.precision(17);
      os << "non-finite coefficient entry at s=" << s;
      throw InputError(os.str());
    }
    const double defect = (Q - Q.transpose()).cwiseAbs().maxCoeff();
    if (defect > options.symmetry_tol) {
      std::ostringstream os;
      os.precision(17);
      os << "Q(s) is not symmetric at s=" << s << " (defect " << defect << ")";
      throw ValidationError(os.str());
    }
    rep.symmetry_defect = std::max(rep.symmetry_defect, defect);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Q, Eigen::EigenvaluesOnly);
    rep.eta0_hat = std::min(rep.eta0_hat, eig.eigenvalues().minCoeff());
    rep.q_sup = std::max(rep.q_sup, operator_norm(Q));
    rep.b_sup = std::max(rep.b_sup, operator_norm(B));
    rep.dq_sup = std::max(rep.dq_sup, operator_norm(dQ));
  }
  rep.pass_i = std::isfinite(rep.q_sup) && std::isfinite(rep.b_sup) && std::isfinite(rep.dq_sup);
  rep.pass_ii = rep.eta0_hat > 0.0;

  // Adjacent segments, both directions; longer spans by the cocycle product.
  const std::size_t n = times.size();
  std::vector<Matrix> back(n - 1), fwd(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    back[k] = fs.U(times[k], times[k + 1]);
    fwd[k] = fs.U(times[k + 1], times[k]);
  }
  std::vector<double> tau_fit, decay_fit, growth_fit;
  std::vector<double> tau_all, decay_all, growth_all;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    Matrix D = Matrix::Identity(fs.dim(), fs.dim());
    Matrix G = D;
    for (std::size_t j = i + 1; j < n; ++j) {
      D = D * back[j - 1];  // U(t_i, t_j)
      G = fwd[j - 1] * G;   // U(t_j, t_i)
      const double tau = times[j] - times[i];
      const double nd = operator_norm(D);
      const double ng = operator_norm(G);
      tau_all.push_back(tau);
      decay_all.push_back(nd);
      growth_all.push_back(ng);
      if (tau >= options.min_gap - 1e-12 && nd > 0.0 && ng > 0.0) {
        tau_fit.push_back(tau);
        decay_fit.push_back(std::log(nd));
        growth_fit.push_back(std::log(ng));
      }
    }
  }

  const LinearFit decay = fit_line(tau_fit, decay_fit);
  rep.decay_slope = decay.slope;
  rep.decay_r2 = decay.r2;
  rep.pass_iii = std::isfinite(decay.r2) && decay.r2 >= options.r2_min && decay.slope < 0.0;
  if (rep.pass_iii) {
    rep.omega_hat = -decay.slope;
    rep.C0_hat = 1.0;
    for (std::size_t k = 0; k < tau_all.size(); ++k)
      rep.C0_hat = std::max(rep.C0_hat, decay_all[k] * std::exp(rep.omega_hat * tau_all[k]));
  }

  const LinearFit growth = fit_line(tau_fit, growth_fit);
  rep.growth_r2 = growth.r2;
  rep.pass_growth = std::isfinite(growth.r2) && growth.slope > 0.0;
  if (rep.pass_growth) {
    rep.varpi_hat = growth.slope;
    rep.M0_hat = 1.0;
    for (std::size_t k = 0; k < tau_all.size(); ++k)
      rep.M0_hat = std::max(rep.M0_hat, growth_all[k] * std::exp(-rep.varpi_hat * tau_all[k]));
  }
  return rep;
}

HypothesisReport check_hypotheses(const CoefficientField& field, TimeWindow window, int n_samples,
                                  const HypothesisOptions& options) {
  return check_hypotheses(FundamentalSolution(field), window, n_samples, options);
}

nlohmann::ordered_json HypothesisReport::to_json() const {
  nlohmann::ordered_json j;
  j["window"] = {window.lo, window.hi};
  j["n_samples"] = n_samples;
  j["eta0_hat"] = eta0_hat;
  j["q_sup"] = q_sup;
  j["b_sup"] = b_sup;
  j["dq_sup"] = dq_sup;
  j["symmetry_defect"] = symmetry_defect;
  j["C0_hat"] = C0_hat;
  j["omega_hat"] = omega_hat;
  j["decay_r2"] = std::isfinite(decay_r2) ? nlohmann::ordered_json(decay_r2) : nlohmann::ordered_json(nullptr);
  j["M0_hat"] = M0_hat;
  j["varpi_hat"] = varpi_hat;
  j["growth_r2"] = std::isfinite(growth_r2) ? nlohmann::ordered_json(growth_r2) : nlohmann::ordered_json(nullptr);
  j["pass"] = {{"i", pass_i}, {"ii", pass_ii}, {"iii", pass_iii}, {"growth", pass_growth}};
  return j;
}

}  // namespace oulab
