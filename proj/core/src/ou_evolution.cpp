#include "oulab/ou_evolution.hpp"

#include "oulab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace oulab {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct FactoredKernel {
  Matrix E;
  Matrix root;
};

FactoredKernel factor_kernel(const FundamentalSolution& fs, double r, double s) {
  const TransitionKernel k = transition_covariance(fs, r, s);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(k.Sigma);
  const double lo = eig.eigenvalues().minCoeff();
  if (!(lo > 0.0) || !k.Sigma.allFinite()) {
    std::ostringstream os;
    os << "transition covariance Sigma(" << s << ", " << r << ") is not positive definite (lambda_min = " << lo
       << ")";
    throw KernelDegeneracyError(os.str());
  }
  return {k.E, spd_sqrt(k.Sigma)};
}

std::string point_string(double s, const Vector& x) {
  std::ostringstream os;
  os << "(s=" << s << ", x=(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << "))";
  return os.str();
}

bool on_boundary(const int* idx, const GridSpec& g) {
  for (int i = 0; i < g.dim(); ++i)
    if (idx[i] == 0 || idx[i] == g.nx[static_cast<std::size_t>(i)] - 1) return true;
  return false;
}

bool in_layer(const int* idx, const GridSpec& g, int layer) {
  for (int i = 0; i < g.dim(); ++i)
    if (idx[i] < layer || idx[i] > g.nx[static_cast<std::size_t>(i)] - 1 - layer) return true;
  return false;
}

// Interior rows of the spatial operator 1/2 Tr(Q D^2) - <Bx, grad> at time s.
// Boundary rows are left empty.
SparseMatrix assemble_operator(const CoefficientField& field, double s, const GridSpec& g, int layer) {
  const int n = g.dim();
  const Matrix Q = field.Q(s);
  const Matrix B = field.B(s);
  const std::size_t m = g.slice_size();
  std::vector<Triplet> trips;
  trips.reserve(m * static_cast<std::size_t>(1 + 4 * n + 4 * n * n));
  int idx[kMaxDim];
  for (std::size_t j = 0; j < m; ++j) {
    g.multi_index(j, idx);
    if (on_boundary(idx, g)) continue;
    const Vector x = g.point(j);
    const Vector v = -(B * x);
    const bool layer_node = in_layer(idx, g, layer);
    const auto row = static_cast<int>(j);
    for (int i = 0; i < n; ++i) {
      const double h = g.h(i);
      const auto st = static_cast<int>(g.stride(i));
      const double d = 0.5 * Q(i, i) / (h * h);
      trips.emplace_back(row, row - st, d);
      trips.emplace_back(row, row + st, d);
      trips.emplace_back(row, row, -2.0 * d);
      const double peclet = Q(i, i) > 0.0 ? std::abs(v[i]) * h / (0.5 * Q(i, i)) : HUGE_VAL;
      if (layer_node || peclet > 2.0) {
        if (v[i] > 0.0) {
          trips.emplace_back(row, row + st, v[i] / h);
          trips.emplace_back(row, row, -v[i] / h);
        } else {
          trips.emplace_back(row, row, v[i] / h);
          trips.emplace_back(row, row - st, -v[i] / h);
        }
      } else {
        trips.emplace_back(row, row + st, v[i] / (2.0 * h));
        trips.emplace_back(row, row - st, -v[i] / (2.0 * h));
      }
      for (int k = i + 1; k < n; ++k) {
        const double c = Q(i, k) / (4.0 * h * g.h(k));
        if (c == 0.0) continue;
        const auto sk = static_cast<int>(g.stride(k));
        trips.emplace_back(row, row + st + sk, c);
        trips.emplace_back(row, row - st - sk, c);
        trips.emplace_back(row, row + st - sk, -c);
        trips.emplace_back(row, row - st + sk, -c);
      }
    }
  }
  SparseMatrix L(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  L.setFromTriplets(trips.begin(), trips.end());
  return L;
}

class LinearSolver {
 public:
  LinearSolver(bool direct, double tol) : direct_(direct), tol_(tol) {}

  void factor(SparseMatrix A) {
    A_ = std::move(A);
    if (direct_) {
      lu_.compute(A_);
      if (lu_.info() != Eigen::Success) throw IntegrationError("fd_solve: sparse LU factorization failed");
    } else {
      it_.setTolerance(tol_);
      it_.setMaxIterations(2000);
      it_.compute(A_);
      if (it_.info() != Eigen::Success) throw IntegrationError("fd_solve: preconditioner setup failed");
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b, const Eigen::VectorXd& guess, int step) {
    if (direct_) return lu_.solve(b);
    Eigen::VectorXd x = it_.solveWithGuess(b, guess);
    if (it_.info() != Eigen::Success) {
      std::ostringstream os;
      os << "fd_solve: iterative solve did not converge at step " << step << " (error " << it_.error() << ")";
      throw IntegrationError(os.str());
    }
    return x;
  }

 private:
  bool direct_;
  double tol_;
  SparseMatrix A_;  // the iterative solver keeps a reference
  Eigen::SparseLU<SparseMatrix> lu_;
  Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> it_;
};

}  // namespace

GaussOptions default_gauss(int n) {
  GaussOptions o;
  o.nodes = n <= 1 ? 80 : n == 2 ? 32 : 12;
  return o;
}

double apply_G(const FundamentalSolution& fs, double r, double s, const SpatialFunction& phi, const Vector& x,
               const GaussOptions& opt) {
  if (r > s) throw ArgumentError("apply_G: requires r <= s");
  if (s == r) return phi(x);
  const FactoredKernel k = factor_kernel(fs, r, s);
  return gaussian_expectation(phi, k.E * x, k.root, opt).value;
}

double apply_G(const FundamentalSolution& fs, double r, double s, const SpatialFunction& phi, const Vector& x) {
  return apply_G(fs, r, s, phi, x, default_gauss(fs.dim()));
}

SpatialFunction apply_G_function(const FundamentalSolution& fs, double r, double s, SpatialFunction phi,
                                 const GaussOptions& opt) {
  if (r > s) throw ArgumentError("apply_G: requires r <= s");
  if (s == r) return phi;
  const FactoredKernel k = factor_kernel(fs, r, s);
  return [k, phi = std::move(phi), opt](const Vector& x) {
    return gaussian_expectation(phi, k.E * x, k.root, opt).value;
  };
}

SpatialFunction apply_G_function(const FundamentalSolution& fs, double r, double s, SpatialFunction phi) {
  return apply_G_function(fs, r, s, std::move(phi), default_gauss(fs.dim()));
}

GridFunction apply_G_grid(const FundamentalSolution& fs, double r, double s, const SpatialFunction& phi,
                          const GridSpec& grid, const GaussOptions& opt) {
  GridSpec g = grid;
  g.window = {s, s};
  g.nt = 1;
  const SpatialFunction Gphi = apply_G_function(fs, r, s, phi, opt);
  GridFunction out(g);
  for (std::size_t j = 0; j < g.slice_size(); ++j) out.at(0, j) = Gphi(g.point(j));
  return out;
}

GridFunction fd_solve(const FundamentalSolution& fs, double r, double s_end, const SpatialFunction& phi,
                      std::optional<double> far_field, const Box& box, const FdOptions& opt) {
  if (s_end < r) throw ArgumentError("fd_solve: requires s_end >= r");
  if (box.dim() != fs.dim()) throw ArgumentError("fd_solve: box dimension does not match the field");
  const GridSpec g = GridSpec::uniform({r, s_end}, opt.tau, box, opt.h);
  GridFunction u(g);
  const std::size_t m = g.slice_size();
  for (std::size_t j = 0; j < m; ++j) u.at(0, j) = phi(g.point(j));
  if (g.nt == 1) return u;

  const auto& field = fs.field();
  const double tau = g.tau();
  const bool constant = field.kind() == FieldKind::Constant;
  std::vector<std::size_t> boundary;
  {
    int idx[kMaxDim];
    for (std::size_t j = 0; j < m; ++j) {
      g.multi_index(j, idx);
      if (on_boundary(idx, g)) boundary.push_back(j);
    }
  }
  std::vector<Vector> boundary_points;
  for (std::size_t j : boundary) boundary_points.push_back(g.point(j));
  auto boundary_value = [&](double s, std::size_t b) {
    if (far_field) return *far_field;
    return phi(Vector(propagate(fs, s, r) * boundary_points[b]));
  };
  // Transport fallback: phi(U(r,s)x) = phi(E x); propagate(fs, s, r) = U(r,s).

  SparseMatrix I(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  I.setIdentity();
  LinearSolver solver(g.dim() == 1, opt.solver_tol);
  SparseMatrix L_prev = assemble_operator(field, g.time(0), g, opt.boundary_layer);
  SparseMatrix L_next = L_prev;
  if (constant) solver.factor(SparseMatrix(I - 0.5 * tau * L_prev));

  Eigen::VectorXd cur(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) cur[static_cast<Eigen::Index>(j)] = u.at(0, j);
  double prev_max = cur.cwiseAbs().maxCoeff();
  const bool bounded = far_field.has_value();

  for (int k = 1; k < g.nt; ++k) {
    const double s1 = g.time(k);
    if (!constant) {
      L_next = assemble_operator(field, s1, g, opt.boundary_layer);
      solver.factor(SparseMatrix(I - 0.5 * tau * L_next));
    }
    Eigen::VectorXd rhs = cur + 0.5 * tau * (L_prev * cur);
    for (std::size_t b = 0; b < boundary.size(); ++b)
      rhs[static_cast<Eigen::Index>(boundary[b])] = boundary_value(s1, b);
    Eigen::VectorXd next = solver.solve(rhs, cur, k);
    if (!next.allFinite()) {
      std::ostringstream os;
      os << "fd_solve: non-finite values at step " << k << " (s=" << s1 << ")";
      throw InstabilityError(os.str());
    }
    const double next_max = next.cwiseAbs().maxCoeff();
    if (bounded && prev_max > 0.0 && next_max > opt.growth_limit * prev_max) {
      std::ostringstream os;
      os << "fd_solve: max-norm grew by a factor " << next_max / prev_max << " at step " << k << " (s=" << s1
         << ")";
      throw InstabilityError(os.str());
    }
    prev_max = next_max;
    for (std::size_t j = 0; j < m; ++j) u.at(k, j) = next[static_cast<Eigen::Index>(j)];
    cur.swap(next);
    if (!constant) L_prev = L_next;
  }
  return u;
}

GridFunction fd_solve(const FundamentalSolution& fs, double r, double s_end, const TestFunction& phi, const Box& box,
                      const FdOptions& opt) {
  return fd_solve(fs, r, s_end, phi.slice(r), phi.far_field(), box, opt);
}

double kernel_fd_discrepancy(const FundamentalSolution& fs, const SpatialFunction& phi, const GridFunction& fd,
                             double fraction) {
  const GridSpec& g = fd.spec();
  const double r = g.window.lo;
  const int n = g.dim();
  std::vector<int> slices{g.nt - 1};
  if (g.nt > 2) slices.push_back((g.nt - 1) / 2);
  double worst = 0.0;
  for (int k : slices) {
    const double s = g.time(k);
    const SpatialFunction Gphi = apply_G_function(fs, r, s, phi, default_gauss(n));
    for (std::size_t j = 0; j < g.slice_size(); ++j) {
      const Vector x = g.point(j);
      bool inside = true;
      for (int i = 0; i < n && inside; ++i) {
        const double mid = 0.5 * (g.box.lo[i] + g.box.hi[i]);
        const double half = 0.5 * fraction * (g.box.hi[i] - g.box.lo[i]);
        inside = std::abs(x[i] - mid) <= half + 1e-12;
      }
      if (inside) worst = std::max(worst, std::abs(Gphi(x) - fd.at(k, j)));
    }
  }
  return worst;
}

CheckReport cross_validate(const FundamentalSolution& fs, double r, double s_end, const TestFunction& phi,
                           const Box& box, const FdOptions& opt, double tol, double min_order) {
  FdOptions fine = opt;
  fine.tau *= 0.5;
  fine.h *= 0.5;
  const SpatialFunction f = phi.slice(r);
  const double e1 = kernel_fd_discrepancy(fs, f, fd_solve(fs, r, s_end, phi, box, opt));
  const double e2 = kernel_fd_discrepancy(fs, f, fd_solve(fs, r, s_end, phi, box, fine));
  const double order = (e1 > 0.0 && e2 > 0.0) ? std::log2(e1 / e2) : HUGE_VAL;
  // Errors already at round-off level carry no order information.
  const bool converged = e1 <= 1e-9;
  CheckReport rep;
  rep.check = "kernel_vs_fd";
  rep.parameters = {{"field", fs.field().describe()}, {"phi", phi.describe()}, {"r", r}, {"s_end", s_end},
                    {"tau", opt.tau}, {"h", opt.h}, {"box_lo", to_json(box.lo)}, {"box_hi", to_json(box.hi)}};
  rep.defect = e1;
  rep.tolerance = tol;
  rep.pass = e1 <= tol && (converged || order >= min_order);
  rep.details = {{"fine_defect", e2}, {"observed_order", number(order)}, {"min_order", min_order}};
  return rep;
}

SpaceTimeFunction apply_T_function(const FundamentalSolution& fs, double t, SpaceTimeFunction f,
                                   const GaussOptions& opt) {
  if (!(t >= 0.0)) throw ArgumentError("apply_T: t must be nonnegative");
  if (t == 0.0) return f;
  struct State {
    std::mutex mutex;
    std::map<double, FactoredKernel> kernels;
  };
  auto state = std::make_shared<State>();
  const FundamentalSolution* fsp = &fs;
  return [state, fsp, t, f = std::move(f), opt](double s, const Vector& x) {
    FactoredKernel k;
    {
      std::lock_guard lock(state->mutex);
      auto it = state->kernels.find(s);
      if (it == state->kernels.end()) {
        if (state->kernels.size() > 4096) state->kernels.clear();
        it = state->kernels.emplace(s, factor_kernel(*fsp, s - t, s)).first;
      }
      k = it->second;
    }
    const double r = s - t;
    return gaussian_expectation([&](const Vector& y) { return f(r, y); }, k.E * x, k.root, opt).value;
  };
}

GridFunction apply_T(const FundamentalSolution& fs, double t, const GridFunction& f, const GaussOptions& opt,
                     int degree) {
  if (!(t >= 0.0)) throw ArgumentError("apply_T: t must be nonnegative");
  const GridSpec& g = f.spec();
  if (t == 0.0) return f;
  const double tau = g.tau();
  if (!(tau > 0.0)) throw ArgumentError("apply_T: the grid has a single time slice");
  const double ratio = t / tau;
  const long shift = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(shift)) > 1e-9 * std::max(1.0, ratio))
    throw ArgumentError("apply_T: t must be a multiple of the time step");
  GridFunction out(g);
  for (int k = 0; k < g.nt; ++k) {
    const long src = k - shift;
    if (src < 0 || !f.retained(static_cast<int>(src))) {
      out.set_retained(k, false);
      continue;
    }
    const int ks = static_cast<int>(src);
    const FactoredKernel kern = factor_kernel(fs, g.time(ks), g.time(k));
    const SpatialFunction slice = f.slice_function(ks, degree);
    for (std::size_t j = 0; j < g.slice_size(); ++j)
      out.at(k, j) = gaussian_expectation(slice, kern.E * g.point(j), kern.root, opt).value;
  }
  return out;
}

GridFunction apply_T(const FundamentalSolution& fs, double t, const GridFunction& f) {
  return apply_T(fs, t, f, default_gauss(f.spec().dim()));
}

CheckReport verify_invariance(const CovarianceFamily& family, double r, double s, const SpatialFunction& phi,
                              double tol) {
  if (r > s) throw ArgumentError("verify_invariance: requires r <= s");
  const auto& fs = family.fs();
  const GaussOptions opt = default_gauss(fs.dim());
  const GaussianMeasure mu_r(family.Qs(r));
  const GaussianMeasure mu_s(family.Qs(s));
  const SpatialFunction Gphi = apply_G_function(fs, r, s, phi, opt);
  const double lhs = integrate(mu_s, Gphi, opt).value;
  const double rhs = integrate(mu_r, phi, opt).value;
  const TransitionKernel k = transition_covariance(fs, r, s);
  const Matrix ident = k.E * family.Qs(s) * k.E.transpose() + k.Sigma - family.Qs(r);
  const double cov_defect = ident.norm() / std::max(1.0, family.Qs(r).norm());

  CheckReport rep;
  rep.check = "invariance";
  rep.parameters = {{"field", fs.field().describe()}, {"r", r}, {"s", s}};
  rep.defect = std::abs(lhs - rhs);
  rep.tolerance = tol;
  rep.pass = rep.defect <= tol;
  rep.details = {{"lhs", lhs}, {"rhs", rhs}, {"covariance_identity_defect", cov_defect}};
  return rep;
}

CheckReport verify_contraction(const CovarianceFamily& family, double r, double s, const SpatialFunction& phi,
                               double p, double tol) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ArgumentError("verify_contraction: p must lie in [1, inf)");
  if (r > s) throw ArgumentError("verify_contraction: requires r <= s");
  const auto& fs = family.fs();
  const GaussOptions opt = default_gauss(fs.dim());
  const SpatialFunction Gphi = apply_G_function(fs, r, s, phi, opt);
  const double lhs = lp_norm_mu(Gphi, GaussianMeasure(family.Qs(s)), p, opt);
  const double rhs = lp_norm_mu(phi, GaussianMeasure(family.Qs(r)), p, opt);
  CheckReport rep;
  rep.check = "contraction";
  rep.parameters = {{"field", fs.field().describe()}, {"r", r}, {"s", s}, {"p", p}};
  rep.defect = lhs - rhs;
  rep.tolerance = tol;
  rep.pass = lhs <= rhs + tol;
  rep.details = {{"lhs", lhs}, {"rhs", rhs}};
  return rep;
}

CheckReport verify_positivity_and_nu(const CovarianceFamily& family, TimeWindow window, double t,
                                     const SpaceTimeFunction& f, const GridSpec& grid, double nu_tol,
                                     double positivity_tol) {
  if (!(t >= 0.0)) throw ArgumentError("verify_positivity_and_nu: t must be nonnegative");
  if (t > window.length()) throw ArgumentError("verify_positivity_and_nu: t exceeds the window length");
  const auto& fs = family.fs();
  const int n = fs.dim();
  const GaussOptions opt = default_gauss(n);
  const SpaceTimeFunction Tf = apply_T_function(fs, t, f, opt);

  double f_min = HUGE_VAL, T_min = HUGE_VAL;
  double f_arg_s = 0.0, T_arg_s = 0.0;
  Vector f_arg = Vector::Zero(n), T_arg = Vector::Zero(n);
  int dropped = 0, used = 0;
  for (int k = 0; k < grid.nt; ++k) {
    const double s = grid.time(k);
    const bool has_source = s - t >= window.lo - 1e-12 && s <= window.hi + 1e-12;
    for (std::size_t j = 0; j < grid.slice_size(); ++j) {
      const Vector x = grid.point(j);
      const double fv = f(s, x);
      if (fv < f_min) f_min = fv, f_arg_s = s, f_arg = x;
      if (!has_source) continue;
      const double v = Tf(s, x);
      if (v < T_min) T_min = v, T_arg_s = s, T_arg = x;
    }
    if (has_source) ++used;
    else ++dropped;
  }

  const SpaceTimeMeasure nu(family, window);
  TimeQuadrature q;
  q.space = opt;
  const double lhs = nu_integral(Tf, nu, {window.lo + t, window.hi}, q);
  const double rhs = nu_integral(f, nu, {window.lo, window.hi - t}, q);
  const double nu_defect = std::abs(lhs - rhs);
  const bool positive = used == 0 || T_min >= -positivity_tol;

  CheckReport rep;
  rep.check = "positivity_and_nu";
  rep.parameters = {{"field", fs.field().describe()}, {"window", {window.lo, window.hi}}, {"t", t}};
  rep.defect = nu_defect;
  rep.tolerance = nu_tol;
  rep.pass = positive && nu_defect <= nu_tol;
  rep.details = {{"positivity_pass", positive},
                 {"positivity_tolerance", positivity_tol},
                 {"min_Tf", number(T_min)},
                 {"min_Tf_at", {{"s", T_arg_s}, {"x", to_json(T_arg)}}},
                 {"input_nonnegative", f_min >= 0.0},
                 {"min_f", number(f_min)},
                 {"min_f_at", {{"s", f_arg_s}, {"x", to_json(f_arg)}}},
                 {"nu_pass", nu_defect <= nu_tol},
                 {"nu_Tf", lhs},
                 {"nu_f", rhs},
                 {"slices_checked", used},
                 {"slices_dropped", dropped}};
  if (!positive) rep.details["violation"] = "T(t)f < 0 at " + point_string(T_arg_s, T_arg);
  return rep;
}

ResolventResult resolvent_solve(const FundamentalSolution& fs, double lambda, const GridFunction& f,
                                const GaussOptions& opt) {
  if (!(lambda > 0.0)) throw ArgumentError("resolvent_solve: lambda must be positive");
  const GridSpec& g = f.spec();
  if (g.dim() != fs.dim()) throw ArgumentError("resolvent_solve: grid dimension does not match the field");
  for (int k = 0; k < g.nt; ++k)
    if (!f.retained(k)) throw ArgumentError("resolvent_solve: forcing has dropped slices");
  ResolventResult res;
  res.truncation = std::log(1e12) / lambda;
  res.u = GridFunction(g);
  const double tau = g.tau();
  const std::size_t m = g.slice_size();
  const int span = tau > 0.0 ? static_cast<int>(std::ceil(res.truncation / tau - 1e-9)) : 0;

  for (int k = 0; k < g.nt; ++k) {
    const double s = g.time(k);
    if (s - g.window.lo < res.truncation) ++res.short_history_slices;
    const int j0 = std::max(0, k - span);
    for (int j = j0; j <= k; ++j) {
      const double w = (j == j0 || j == k) && k > j0 ? 0.5 * tau : (k == j0 ? 0.0 : tau);
      if (w == 0.0) continue;
      const double r = g.time(j);
      const double decay = std::exp(-lambda * (s - r));
      if (j == k) {
        for (std::size_t i = 0; i < m; ++i) res.u.at(k, i) += w * f.at(j, i);
        continue;
      }
      const FactoredKernel kern = factor_kernel(fs, r, s);
      const SpatialFunction slice = f.slice_function(j);
      for (std::size_t i = 0; i < m; ++i)
        res.u.at(k, i) += w * decay * gaussian_expectation(slice, kern.E * g.point(i), kern.root, opt).value;
    }
  }
  res.coverage_warning = res.short_history_slices > 0;

  // Residual on interior nodes.
  const int n = g.dim();
  int idx[kMaxDim];
  for (int k = 1; k + 1 < g.nt; ++k) {
    const double s = g.time(k);
    const Matrix Q = fs.field().Q(s);
    const Matrix B = fs.field().B(s);
    for (std::size_t j = 0; j < m; ++j) {
      g.multi_index(j, idx);
      if (on_boundary(idx, g)) continue;
      const Vector x = g.point(j);
      const Vector bx = B * x;
      double Au = 0.0;
      for (int a = 0; a < n; ++a) {
        const std::size_t sa = g.stride(a);
        const double ha = g.h(a);
        const double up = res.u.at(k, j + sa), dn = res.u.at(k, j - sa), c = res.u.at(k, j);
        Au += 0.5 * Q(a, a) * (up - 2.0 * c + dn) / (ha * ha);
        Au -= bx[a] * (up - dn) / (2.0 * ha);
        for (int b = a + 1; b < n; ++b) {
          const std::size_t sb = g.stride(b);
          const double cross = (res.u.at(k, j + sa + sb) - res.u.at(k, j + sa - sb) - res.u.at(k, j - sa + sb) +
                                res.u.at(k, j - sa - sb)) /
                               (4.0 * ha * g.h(b));
          Au += Q(a, b) * cross;
        }
      }
      const double Dsu = (res.u.at(k + 1, j) - res.u.at(k - 1, j)) / (2.0 * tau);
      res.residual = std::max(res.residual, std::abs(Dsu - Au + lambda * res.u.at(k, j) - f.at(k, j)));
    }
  }
  res.sup_u = res.u.max_abs();
  res.sup_f = f.max_abs();
  return res;
}

ResolventResult resolvent_solve(const FundamentalSolution& fs, double lambda, const GridFunction& f) {
  return resolvent_solve(fs, lambda, f, default_gauss(f.spec().dim()));
}

}  // namespace oulab
