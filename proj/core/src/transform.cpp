#include "oulab/transform.hpp"

#include "oulab/errors.hpp"
#include "oulab/expression.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>

namespace oulab {

namespace {

const double kLogMax = std::log(DBL_MAX);

std::string at_string(double s, const Vector& x) {
  std::ostringstream os;
  os.precision(10);
  os << "(s=" << s << ", x=(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << "))";
  return os.str();
}

void check_p(double p, const char* what) {
  if (!(p > 1.0) || !std::isfinite(p)) throw ArgumentError(std::string(what) + ": p must lie in (1, inf)");
}

// Per-time data of the OU transform.
struct SliceOU {
  double s = 0.0;
  Matrix Q, B, Qsi;
  Matrix A;       // V_O = <A x, x> - t
  double t = 0.0;
  Matrix G;       // F_O = G x
  double div = 0.0;
};

SliceOU slice_ou(const WeightFunction& wf, double p, double s) {
  SliceOU d;
  d.s = s;
  d.Q = wf.family().field().Q(s);
  d.B = wf.family().field().B(s);
  d.Qsi = wf.family().Qs_inverse(s);
  d.A = symmetrize(d.Qsi * d.Q * d.Qsi) * (0.5 / p) * (1.0 - 1.0 / p);
  d.t = (d.Q * d.Qsi).trace() / (2.0 * p);
  d.G = d.Q * d.Qsi / p - d.B;
  d.div = d.G.trace();
  return d;
}

double quad(const Matrix& A, const Vector& x) { return x.dot(A * x); }

template <class F>
void for_nodes(const GridSpec& g, F&& f) {
  for (int k = 0; k < g.nt; ++k)
    for (std::size_t j = 0; j < g.slice_size(); ++j) f(k, j);
}

}  // namespace

WeightFunction::WeightFunction(std::shared_ptr<const CovarianceFamily> family) : family_(std::move(family)) {
  if (!family_) throw ArgumentError("WeightFunction: null covariance family");
}

double WeightFunction::value(double s, const Vector& x) const { return 0.5 * quad(family_->Qs_inverse(s), x); }

Vector WeightFunction::grad(double s, const Vector& x) const { return family_->Qs_inverse(s) * x; }

Matrix WeightFunction::hess(double s) const { return family_->Qs_inverse(s); }

double WeightFunction::ds(double s, const Vector& x) const {
  const Matrix Qsi = family_->Qs_inverse(s);
  const Vector y = Qsi * x;
  return 0.5 * y.dot(family_->field().Q(s) * y) - x.dot(Qsi * (family_->field().B(s) * x));
}

double WeightFunction::ds_lyapunov(double s, const Vector& x) const {
  const Vector y = family_->Qs_inverse(s) * x;
  return -0.5 * y.dot(family_->dQs(s) * y);
}

double mp_log_factor(double p, const WeightFunction& wf, double s, const Vector& x) { return wf.value(s, x) / p; }

SpaceTimeFunction mp_apply(double p, const WeightFunction& wf, SpaceTimeFunction f) {
  check_p(p, "mp_apply");
  return [p, wf, f = std::move(f)](double s, const Vector& x) {
    const double l = mp_log_factor(p, wf, s, x);
    if (l > kLogMax) throw RangeError("mp_apply: exp(Phi/p) overflows at " + at_string(s, x));
    const double v = f(s, x);
    return v == 0.0 ? 0.0 : std::exp(l) * v;
  };
}

SpaceTimeFunction mp_inverse(double p, const WeightFunction& wf, SpaceTimeFunction g) {
  check_p(p, "mp_inverse");
  return [p, wf, g = std::move(g)](double s, const Vector& x) {
    return std::exp(-mp_log_factor(p, wf, s, x)) * g(s, x);
  };
}

Vector drift_FO(const WeightFunction& wf, double p, double s, const Vector& x) {
  const auto& field = wf.family().field();
  return field.Q(s) * (wf.family().Qs_inverse(s) * x) / p - field.B(s) * x;
}

double potential_VO(const WeightFunction& wf, double p, double s, const Vector& x) {
  const Matrix Q = wf.family().field().Q(s);
  const Matrix Qsi = wf.family().Qs_inverse(s);
  const Vector y = Qsi * x;
  return (0.5 / p) * (1.0 - 1.0 / p) * y.dot(Q * y) - (Q * Qsi).trace() / (2.0 * p);
}

double div_FO(const WeightFunction& wf, double p, double s) {
  const auto& field = wf.family().field();
  return (field.Q(s) * wf.family().Qs_inverse(s)).trace() / p - field.B(s).trace();
}

double potential_WO(const TransformConstants& c, double, const Vector& x) { return c.c0_eff + c.k1 * x.squaredNorm(); }

ojson Witness::to_json() const {
  return {{"s", s}, {"x", oulab::to_json(x)}, {"value", number(value)}};
}

ojson TransformConstants::to_json() const {
  ojson j;
  j["p"] = p;
  j["k0"] = k0;
  j["k1"] = k1;
  j["c0"] = c0;
  j["c0_eff"] = c0_eff;
  j["lambda"] = lambda;
  j["c1"] = c1;
  j["kappa"] = kappa;
  j["theta"] = theta;
  j["theta_min"] = theta_min;
  j["witnesses"] = {{"k1", k1_witness.to_json()},
                    {"c1", c1_witness.to_json()},
                    {"kappa", kappa_witness.to_json()},
                    {"theta", theta_witness.to_json()}};
  return j;
}

namespace {

std::vector<SliceOU> slices_for(const WeightFunction& wf, double p, const GridSpec& g) {
  std::vector<SliceOU> out;
  out.reserve(static_cast<std::size_t>(g.nt));
  for (int k = 0; k < g.nt; ++k) out.push_back(slice_ou(wf, p, g.time(k)));
  return out;
}

struct VfCheck {
  double worst = 0.0;
  int which = 0;
  Witness witness;
};

// Worst relative violation of the three inequalities plus theta.
VfCheck vf_violation(const std::vector<SliceOU>& sl, const GridSpec& g, const TransformConstants& c,
                     const std::vector<Vector>& pts) {
  VfCheck out;
  for_nodes(g, [&](int k, std::size_t j) {
    const auto& d = sl[static_cast<std::size_t>(k)];
    const Vector& x = pts[j];
    const double V = quad(d.A, x) - d.t;
    const double W = c.c0_eff + c.k1 * x.squaredNorm();
    const double lv = c.lambda + V;
    const double F = (d.G * x).norm();
    const double scale = std::max(1.0, std::abs(lv) + W);
    const double v[4] = {(W - lv) / scale, (lv - c.c1 * W) / scale, (F - c.kappa * std::sqrt(W)) / scale,
                         -(c.theta * W + d.div) / scale};
    for (int i = 0; i < 4; ++i)
      if (v[i] > out.worst) out = {v[i], i + 1, {d.s, x, v[i]}};
  });
  return out;
}

}  // namespace

TransformConstants fit_transform_constants(const WeightFunction& wf, double p, const GridSpec& grid,
                                           const FitOptions& opt) {
  check_p(p, "fit_transform_constants");
  if (grid.dim() != wf.dim()) throw ArgumentError("fit_transform_constants: grid dimension mismatch");
  const auto sl = slices_for(wf, p, grid);
  std::vector<Vector> pts;
  for (std::size_t j = 0; j < grid.slice_size(); ++j) pts.push_back(grid.point(j));

  // Slice-wise quantities are sampled on a time grid 4x finer than the
  // declared one, so the constants survive refinement of the check grid.
  std::vector<SliceOU> fine;
  {
    const int nt = grid.nt > 1 ? 4 * (grid.nt - 1) + 1 : 1;
    for (int k = 0; k < nt; ++k)
      fine.push_back(slice_ou(wf, p, nt > 1 ? grid.window.lo + grid.window.length() * k / (nt - 1) : grid.window.lo));
  }

  TransformConstants c;
  c.p = p;
  double t_max = 0.0, a_inf = HUGE_VAL, div_sup = 0.0, trace_scale = 1.0;
  Witness a_w;
  for (const auto& d : fine) {
    t_max = std::max(t_max, d.t);
    div_sup = std::max(div_sup, std::abs(d.div));
    trace_scale = std::max(trace_scale, std::abs(d.B.trace()));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(d.A);
    if (eig.eigenvalues()[0] < a_inf) {
      a_inf = eig.eigenvalues()[0];
      a_w = {d.s, eig.eigenvectors().col(0), a_inf};
    }
  }
  if (!(a_inf > 0.0))
    throw ConstantsFitError("V_O has no positive quadratic lower bound; witness " + at_string(a_w.s, a_w.x));

  // k1(k0) = min(a_inf, min over nodes x != 0 of (V_O + k0)/|x|^2).
  Witness k1_w;
  auto k1_of = [&](double k0, Witness* w) {
    double best = a_inf;
    if (w) *w = a_w;
    for_nodes(grid, [&](int k, std::size_t j) {
      const double r2 = pts[j].squaredNorm();
      if (r2 == 0.0) return;
      const auto& d = sl[static_cast<std::size_t>(k)];
      const double v = (quad(d.A, pts[j]) - d.t + k0) / r2;
      if (v < best) {
        best = v;
        if (w) *w = {d.s, pts[j], v};
      }
    });
    return best;
  };
  // x = 0 forces k0 >= t_max.
  double k1_best = -HUGE_VAL;
  std::vector<double> k0s, k1s;
  for (int j = 0; j <= opt.k0_grid; ++j) {
    const double k0 = t_max * std::pow(10.0, j / 8.0);
    k0s.push_back(k0);
    k1s.push_back(k1_of(k0, nullptr));
    k1_best = std::max(k1_best, k1s.back());
  }
  const double target = k1_best - 1e-12 * std::abs(k1_best);
  std::size_t first = 0;
  while (k1s[first] < target) ++first;
  double hi = k0s[first];
  if (first > 0) {
    double lo = k0s[first - 1];
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (k1_of(mid, nullptr) >= target ? hi : lo) = mid;
    }
  }
  c.k0 = hi;
  c.k1 = k1_of(c.k0, &k1_w);
  c.k1_witness = k1_w;
  if (!(c.k1 > 0.0))
    throw ConstantsFitError("no positive k1 on the grid; witness " + at_string(k1_w.s, k1_w.x));

  // div F_O is computed from a numerical Q_s; values at round-off level are zero.
  c.c0 = 2.0 * div_sup;
  if (c.c0 <= 1e-8 * trace_scale) c.c0 = 0.0;
  c.c0_eff = c.c0 > 0.0 ? c.c0 : opt.c0_floor;
  c.lambda = c.k0 + c.c0_eff;

  // Suprema over all x of ratios of quadratic forms: (lambda + V_O)/W_O is
  // monotone in |x|^2 along rays, |F_O|^2/W_O is bounded by its limit, and
  // -div F_O / W_O peaks at x = 0.
  const double radius = std::max(grid.box.lo.cwiseAbs().maxCoeff(), grid.box.hi.cwiseAbs().maxCoeff());
  c.c1 = 1.0;
  c.c1_witness = {grid.window.lo, Vector::Zero(wf.dim()), 1.0};
  c.kappa_witness = c.c1_witness;
  c.kappa_witness.value = 0.0;
  c.theta_witness = c.kappa_witness;
  for (const auto& d : fine) {
    const Vector origin = Vector::Zero(wf.dim());
    const double at0 = (c.lambda - d.t) / c.c0_eff;
    if (at0 > c.c1) c.c1 = at0, c.c1_witness = {d.s, origin, at0};
    Eigen::SelfAdjointEigenSolver<Matrix> ea(d.A);
    const double at_inf = ea.eigenvalues()[ea.eigenvalues().size() - 1] / c.k1;
    if (at_inf > c.c1) c.c1 = at_inf, c.c1_witness = {d.s, radius * ea.eigenvectors().col(ea.eigenvalues().size() - 1), at_inf};
    Eigen::SelfAdjointEigenSolver<Matrix> eg(symmetrize(d.G.transpose() * d.G));
    const double kap = std::sqrt(std::max(0.0, eg.eigenvalues()[eg.eigenvalues().size() - 1]) / c.k1);
    if (kap > c.kappa)
      c.kappa = kap, c.kappa_witness = {d.s, radius * eg.eigenvectors().col(eg.eigenvalues().size() - 1), kap};
    const double th = -d.div / c.c0_eff;
    if (th > c.theta_min) c.theta_min = th, c.theta_witness = {d.s, origin, th};
  }

  const VfCheck v = vf_violation(sl, grid, c, pts);
  if (v.worst > 1e-12) {
    std::ostringstream os;
    os << "inequality " << v.which << " of the W_O sandwich fails by " << v.worst << " at "
       << at_string(v.witness.s, v.witness.x);
    throw ConstantsFitError(os.str());
  }
  return c;
}

CheckReport check_vf_conditions(const WeightFunction& wf, const TransformConstants& c, const GridSpec& grid) {
  const auto sl = slices_for(wf, c.p, grid);
  std::vector<Vector> pts;
  for (std::size_t j = 0; j < grid.slice_size(); ++j) pts.push_back(grid.point(j));
  const VfCheck v = vf_violation(sl, grid, c, pts);
  CheckReport rep;
  rep.check = "vf_conditions";
  rep.parameters = {{"field", wf.family().field().describe()}, {"constants", c.to_json()},
                    {"nodes", static_cast<double>(grid.size())}};
  rep.defect = v.worst;
  rep.tolerance = 1e-12;
  rep.pass = v.worst <= 1e-12;
  if (!rep.pass) rep.details = {{"inequality", v.which}, {"witness", v.witness.to_json()}};
  return rep;
}

double conjugation_residual(const TestFunction& u, double p, const WeightFunction& wf, const GridSpec& grid) {
  check_p(p, "conjugation_residual");
  const int n = grid.dim();
  if (n != wf.dim() || u.dim() != n) throw ArgumentError("conjugation_residual: dimension mismatch");
  if (grid.nt < 3) throw ArgumentError("conjugation_residual: need at least three time nodes");
  const double tau = grid.tau();
  const auto sl = slices_for(wf, p, grid);
  auto v = [&](int k, const Vector& x) {
    const auto& d = sl[static_cast<std::size_t>(k)];
    const double l = 0.5 * quad(d.Qsi, x) / p;
    if (l > kLogMax) throw RangeError("conjugation_residual: exp(Phi/p) overflows at " + at_string(d.s, x));
    return std::exp(l) * u.value(d.s, x);
  };
  double worst = 0.0;
  int idx[kMaxDim];
  for (int k = 1; k + 1 < grid.nt; ++k) {
    const auto& d = sl[static_cast<std::size_t>(k)];
    for (std::size_t j = 0; j < grid.slice_size(); ++j) {
      grid.multi_index(j, idx);
      bool edge = false;
      for (int i = 0; i < n; ++i) edge = edge || idx[i] == 0 || idx[i] == grid.nx[static_cast<std::size_t>(i)] - 1;
      if (edge) continue;
      const Vector x = grid.point(j);
      const double v0 = v(k, x);
      const Vector bx = d.B * x;
      double lhs = -(v(k + 1, x) - v(k - 1, x)) / (2.0 * tau);
      for (int a = 0; a < n; ++a) {
        const double ha = grid.h(a);
        Vector xp = x, xm = x;
        xp[a] += ha;
        xm[a] -= ha;
        const double vp = v(k, xp), vm = v(k, xm);
        lhs += 0.5 * d.Q(a, a) * (vp - 2.0 * v0 + vm) / (ha * ha) - bx[a] * (vp - vm) / (2.0 * ha);
        for (int b = a + 1; b < n; ++b) {
          const double hb = grid.h(b);
          Vector y = x;
          double cross = 0.0;
          for (int sa : {1, -1})
            for (int sb : {1, -1}) {
              y[a] = x[a] + sa * ha;
              y[b] = x[b] + sb * hb;
              cross += sa * sb * v(k, y);
            }
          lhs += d.Q(a, b) * cross / (4.0 * ha * hb);
        }
      }
      const Vector g = u.grad(d.s, x);
      const Matrix H = u.hess(d.s, x);
      const double V = quad(d.A, x) - d.t;
      const double Lu = -u.ds(d.s, x) + 0.5 * (d.Q * H).trace() + (d.G * x).dot(g) - V * u.value(d.s, x);
      const double rhs = std::exp(0.5 * quad(d.Qsi, x) / p) * Lu;
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

CheckReport conjugation_convergence(const TestFunction& u, double p, const WeightFunction& wf, const GridSpec& grid,
                                    double tol, double min_order) {
  GridSpec fine = grid;
  fine.nt = 2 * (grid.nt - 1) + 1;
  for (auto& m : fine.nx) m = 2 * (m - 1) + 1;
  const double e1 = conjugation_residual(u, p, wf, grid);
  const double e2 = conjugation_residual(u, p, wf, fine);
  const bool tiny = e1 <= 1e-12;
  const double order = (e1 > 0.0 && e2 > 0.0) ? std::log2(e1 / e2) : HUGE_VAL;
  CheckReport rep;
  rep.check = "conjugation";
  rep.parameters = {{"field", wf.family().field().describe()}, {"u", u.describe()}, {"p", p},
                    {"tau", grid.tau()}, {"h", grid.h(0)}};
  rep.defect = e1;
  rep.tolerance = tol;
  rep.pass = e1 <= tol && (tiny || order >= min_order);
  rep.details = {{"fine_defect", e2}, {"observed_order", number(order)}, {"min_order", min_order}};
  return rep;
}

Smallness smallness(double p, double theta, double beta, double gamma, double kappa, double M) {
  check_p(p, "smallness");
  for (double v : {theta, beta, gamma, kappa, M})
    if (!(v >= 0.0) || !std::isfinite(v)) throw ArgumentError("smallness: parameters must be finite and nonnegative");
  Smallness out;
  out.value = theta / p + (p - 1.0) * ((beta + gamma * kappa) / p + gamma * gamma * M * M / 4.0);
  out.margin = 1.0 - out.value;
  out.pass = out.value < 1.0;
  return out;
}

ojson ConditionConstants::to_json() const {
  ojson j = ojson::object();
  auto put = [&](const char* k, const std::optional<double>& v) {
    if (v) j[k] = *v;
  };
  put("eta0", eta0);
  put("c0", c0);
  put("c1", c1);
  put("beta", beta);
  put("gamma", gamma);
  put("K_beta", K_beta);
  put("K_gamma", K_gamma);
  put("kappa", kappa);
  put("theta", theta);
  return j;
}

ConditionConstants ConditionConstants::from_json(const nlohmann::json& j) {
  ConditionConstants c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw InputError("constants: expected an object");
  auto get = [&](const char* k, std::optional<double>& v) {
    if (!j.contains(k)) return;
    if (!j[k].is_number()) throw InputError(std::string("constants: \"") + k + "\" must be a number");
    v = j[k].get<double>();
    if (!(*v >= 0.0)) throw InputError(std::string("constants: \"") + k + "\" must be nonnegative");
  };
  get("eta0", c.eta0);
  get("c0", c.c0);
  get("c1", c.c1);
  get("beta", c.beta);
  get("gamma", c.gamma);
  get("K_beta", c.K_beta);
  get("K_gamma", c.K_gamma);
  get("kappa", c.kappa);
  get("theta", c.theta);
  return c;
}

double GeneralCoefficients::principal(const TestFunction& u, double s, const Vector& x) const {
  const Matrix A = a(s, x);
  return (A * u.hess(s, x)).trace() + div_a(s, x).dot(u.grad(s, x)) - u.ds(s, x);
}

double GeneralCoefficients::apply(const TestFunction& u, double s, const Vector& x) const {
  const Vector g = u.grad(s, x);
  return (a(s, x) * u.hess(s, x)).trace() + div_a(s, x).dot(g) + F(s, x).dot(g) - V(s, x) * u.value(s, x) -
         u.ds(s, x);
}

GeneralCoefficients GeneralCoefficients::heat(int n, double c) {
  GeneralCoefficients g;
  g.n = n;
  g.name = "heat";
  g.a = [n](double, const Vector&) { return Matrix(Matrix::Identity(n, n)); };
  g.div_a = [n](double, const Vector&) { return Vector(Vector::Zero(n)); };
  g.F = g.div_a;
  g.div_F = [](double, const Vector&) { return 0.0; };
  g.V = [c](double, const Vector&) { return c; };
  g.W = g.V;
  g.ds_W = g.div_F;
  g.grad_W = g.div_a;
  g.declared.beta = 0.0;
  g.declared.K_beta = 0.0;
  g.declared.gamma = 0.0;
  g.declared.K_gamma = 0.0;
  g.declared.kappa = 0.0;
  g.declared.theta = 0.0;
  return g;
}

GeneralCoefficients GeneralCoefficients::from_ou(const WeightFunction& wf, const TransformConstants& c, double gamma) {
  GeneralCoefficients g;
  const int n = wf.dim();
  const double p = c.p;
  g.n = n;
  g.name = "ou:" + wf.family().field().name();
  auto fam = wf.family_ptr();
  g.a = [fam](double s, const Vector&) { return Matrix(0.5 * fam->field().Q(s)); };
  g.div_a = [n](double, const Vector&) { return Vector(Vector::Zero(n)); };
  g.F = [wf, p](double s, const Vector& x) { return drift_FO(wf, p, s, x); };
  g.div_F = [wf, p](double s, const Vector&) { return div_FO(wf, p, s); };
  g.V = [wf, c](double s, const Vector& x) { return c.lambda + potential_VO(wf, c.p, s, x); };
  g.W = [c](double s, const Vector& x) { return potential_WO(c, s, x); };
  g.ds_W = [](double, const Vector&) { return 0.0; };
  g.grad_W = [c](double, const Vector& x) { return Vector(2.0 * c.k1 * x); };
  g.declared.beta = 0.0;
  g.declared.K_beta = 0.0;
  g.declared.gamma = gamma;
  g.declared.kappa = c.kappa;
  g.declared.theta = c.theta;
  g.declared.c0 = c.c0_eff;
  g.declared.c1 = c.c1;
  return g;
}

namespace {

std::vector<Expression> parse_entries(const nlohmann::json& v, int count, const std::vector<std::string>& vars,
                                      const char* what) {
  std::vector<Expression> out;
  auto one = [&](const nlohmann::json& e) {
    if (e.is_number()) return Expression::constant(e.get<double>());
    if (e.is_string()) return Expression::parse(e.get<std::string>(), vars);
    throw InputError(std::string("coefficients: entries of \"") + what + "\" must be numbers or strings");
  };
  if (v.is_array()) {
    for (const auto& e : v) {
      if (e.is_array())
        for (const auto& f : e) out.push_back(one(f));
      else
        out.push_back(one(e));
    }
  } else {
    out.push_back(one(v));
  }
  if (static_cast<int>(out.size()) != count)
    throw InputError(std::string("coefficients: \"") + what + "\" has the wrong number of entries");
  return out;
}

}  // namespace

GeneralCoefficients GeneralCoefficients::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("coefficients: expected a JSON object");
  if (!j.contains("N") || !j["N"].is_number_integer()) throw InputError("coefficients: missing integer \"N\"");
  const int n = j["N"].get<int>();
  if (n < 1 || n > kMaxDim) throw InputError("coefficients: N must be in 1..8");
  const auto vars = Expression::space_time_variables(n);
  GeneralCoefficients g;
  g.n = n;
  g.name = j.value("name", std::string("custom"));

  std::vector<Expression> a;
  if (!j.contains("a")) throw InputError("coefficients: missing \"a\"");
  if (j["a"].is_array()) {
    a = parse_entries(j["a"], n * n, vars, "a");
  } else {
    const Expression d = parse_entries(j["a"], 1, vars, "a").front();
    a.assign(static_cast<std::size_t>(n * n), Expression::constant(0.0));
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i * n + i)] = d;
  }
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k)
      if (a[static_cast<std::size_t>(i * n + k)].to_string() != a[static_cast<std::size_t>(k * n + i)].to_string())
        throw ValidationError("coefficients: \"a\" must be symmetric");
  std::vector<Expression> div_a(static_cast<std::size_t>(n), Expression::constant(0.0));
  for (int col = 0; col < n; ++col)
    for (int i = 0; i < n; ++i)
      div_a[static_cast<std::size_t>(col)] =
          div_a[static_cast<std::size_t>(col)] + a[static_cast<std::size_t>(i * n + col)].derivative(i + 1);

  std::vector<Expression> F(static_cast<std::size_t>(n), Expression::constant(0.0));
  if (j.contains("F")) F = parse_entries(j["F"], n, vars, "F");
  Expression divF = Expression::constant(0.0);
  for (int i = 0; i < n; ++i) divF = divF + F[static_cast<std::size_t>(i)].derivative(i + 1);
  if (!j.contains("V") || !j.contains("W")) throw InputError("coefficients: \"V\" and \"W\" are required");
  const Expression V = parse_entries(j["V"], 1, vars, "V").front();
  const Expression W = parse_entries(j["W"], 1, vars, "W").front();
  std::vector<Expression> gW;
  for (int i = 0; i < n; ++i) gW.push_back(W.derivative(i + 1));
  const Expression dsW = W.derivative(0);

  g.a = [a, n](double s, const Vector& x) {
    Matrix M(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) M(i, k) = a[static_cast<std::size_t>(i * n + k)].at(s, x);
    return M;
  };
  auto vec = [n](std::vector<Expression> e) {
    return [e = std::move(e), n](double s, const Vector& x) {
      Vector v(n);
      for (int i = 0; i < n; ++i) v[i] = e[static_cast<std::size_t>(i)].at(s, x);
      return v;
    };
  };
  auto scal = [](Expression e) { return [e = std::move(e)](double s, const Vector& x) { return e.at(s, x); }; };
  g.div_a = vec(div_a);
  g.F = vec(F);
  g.div_F = scal(divF);
  g.V = scal(V);
  g.W = scal(W);
  g.ds_W = scal(dsW);
  g.grad_W = vec(gW);
  if (j.contains("constants")) g.declared = ConditionConstants::from_json(j["constants"]);
  return g;
}

bool ConditionReport::pass() const {
  return std::all_of(items.begin(), items.end(), [](const Item& i) { return i.pass; });
}

const ConditionReport::Item& ConditionReport::item(const std::string& id) const {
  for (const auto& i : items)
    if (i.id == id) return i;
  throw ArgumentError("condition report: no item " + id);
}

ojson ConditionReport::to_json() const {
  ojson j;
  j["pass"] = pass();
  j["M"] = M;
  ojson arr = ojson::array();
  for (const auto& i : items) {
    ojson e;
    e["id"] = i.id;
    e["pass"] = i.pass;
    e["constants"] = i.constants;
    e["witness"] = i.witness.to_json();
    if (!i.note.empty()) e["note"] = i.note;
    arr.push_back(e);
  }
  j["conditions"] = arr;
  return j;
}

ConditionReport check_A1_A5(const GeneralCoefficients& gc, double p, const GridSpec& grid) {
  check_p(p, "check_A1_A5");
  if (grid.dim() != gc.n) throw ArgumentError("check_A1_A5: grid dimension mismatch");
  const auto& D = gc.declared;
  const double rel = 1e-9;

  double eta = HUGE_VAL, amax = 0.0, sym = 0.0;
  Witness eta_w;
  double c0 = HUGE_VAL, beta_min = 0.0, gamma_min = 0.0, Kb = 0.0, Kg = 0.0;
  Witness c0_w, beta_w, gamma_w;
  double sand = HUGE_VAL, c1 = 0.0;
  Witness sand_w, c1_w;
  double kappa = 0.0;
  Witness kappa_w;
  double theta = 0.0;
  Witness theta_w;
  bool finite = true;
  Witness finite_w;

  // First pass fixes the tightest beta, gamma when they are not declared.
  std::vector<std::array<double, 6>> vals;
  vals.reserve(grid.size());
  for_nodes(grid, [&](int k, std::size_t j) {
    const double s = grid.time(k);
    const Vector x = grid.point(j);
    const Matrix A = gc.a(s, x);
    const double W = gc.W(s, x), V = gc.V(s, x), dsW = gc.ds_W(s, x);
    const double gW = gc.grad_W(s, x).norm();
    const double F = gc.F(s, x).norm(), divF = gc.div_F(s, x);
    if (!A.allFinite() || !std::isfinite(W + V + dsW + gW + F + divF)) {
      if (finite) finite_w = {s, x, 0.0};
      finite = false;
      return;
    }
    sym = std::max(sym, (A - A.transpose()).cwiseAbs().maxCoeff());
    const Matrix As = symmetrize(A);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(As, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues()[0] < eta) eta = eig.eigenvalues()[0], eta_w = {s, x, eta};
    amax = std::max(amax, eig.eigenvalues()[eig.eigenvalues().size() - 1]);
    if (W < c0) c0 = W, c0_w = {s, x, W};
    if (W > 0.0) {
      const double b = std::abs(dsW) / (W * W);
      if (b > beta_min) beta_min = b, beta_w = {s, x, b};
      const double g = gW / std::pow(W, 1.5);
      if (g > gamma_min) gamma_min = g, gamma_w = {s, x, g};
      const double r = V / W;
      if (r > c1) c1 = r, c1_w = {s, x, r};
      const double kap = F / std::sqrt(W);
      if (kap > kappa) kappa = kap, kappa_w = {s, x, kap};
      const double th = -divF / W;
      if (th > theta) theta = th, theta_w = {s, x, th};
    }
    if (V - W < sand) sand = V - W, sand_w = {s, x, V - W};
    vals.push_back({s, W, dsW, gW, 0.0, 0.0});
  });

  ConditionReport rep;
  rep.M = std::sqrt(std::max(0.0, amax));
  if (!finite) {
    ConditionReport::Item it{"finite", false, ojson::object(), finite_w, "coefficients not finite on the grid"};
    rep.items.push_back(it);
  }

  const double beta = D.beta.value_or(beta_min);
  const double gamma = D.gamma.value_or(gamma_min);
  for (const auto& v : vals) {
    const double W = v[1];
    Kb = std::max(Kb, std::abs(v[2]) - beta * W * W);
    Kg = std::max(Kg, v[3] - gamma * std::pow(W, 1.5));
  }

  {
    ConditionReport::Item it;
    it.id = "A1";
    it.constants = {{"eta0_hat", number(eta)}, {"M", rep.M}, {"symmetry_defect", sym}};
    it.witness = eta_w;
    it.pass = sym <= 1e-12 * std::max(1.0, amax) && eta > 0.0 && (!D.eta0 || eta >= *D.eta0 * (1.0 - rel));
    if (!it.pass) it.note = eta > 0.0 ? "declared eta0 not met or a not symmetric" : "a is not uniformly elliptic";
    rep.items.push_back(it);
  }
  {
    ConditionReport::Item it;
    it.id = "A2";
    it.constants = {{"c0_hat", number(c0)},   {"beta", beta},       {"gamma", gamma},
                    {"K_beta", Kb},           {"K_gamma", Kg},      {"beta_min", beta_min},
                    {"gamma_min", gamma_min}, {"beta_witness", beta_w.to_json()}, {"gamma_witness", gamma_w.to_json()}};
    it.witness = c0_w;
    bool ok = c0 > 0.0 && (!D.c0 || c0 >= *D.c0 * (1.0 - rel));
    if (D.K_beta && Kb > *D.K_beta * (1.0 + rel) + 1e-12) {
      ok = false;
      it.note = "declared K_beta too small";
    }
    if (D.K_gamma && Kg > *D.K_gamma * (1.0 + rel) + 1e-12) {
      ok = false;
      it.note = "declared K_gamma too small";
    }
    if (!(c0 > 0.0)) it.note = "W is not bounded below by a positive constant";
    it.pass = ok;
    rep.items.push_back(it);
  }
  {
    ConditionReport::Item it;
    it.id = "A3";
    it.constants = {{"min_V_minus_W", number(sand)}, {"c1_hat", c1}};
    it.witness = sand_w;
    const bool lower = sand >= -1e-12 * std::max(1.0, std::abs(c0));
    const bool upper = !D.c1 || c1 <= *D.c1 * (1.0 + rel);
    it.pass = lower && upper;
    if (!lower) it.note = "V < W";
    else if (!upper) it.note = "V > c1 W", it.witness = c1_w;
    rep.items.push_back(it);
  }
  {
    ConditionReport::Item it;
    it.id = "A4";
    it.constants = {{"kappa_hat", kappa}};
    it.witness = kappa_w;
    it.pass = !D.kappa || kappa <= *D.kappa * (1.0 + rel) + 1e-12;
    if (!it.pass) it.note = "|F| > kappa W^(1/2)";
    rep.items.push_back(it);
  }
  {
    ConditionReport::Item it;
    it.id = "A5";
    const double th = D.theta.value_or(theta);
    it.constants = {{"theta_hat", theta}, {"theta", th}};
    it.witness = theta_w;
    it.pass = theta <= th * (1.0 + rel) + 1e-12 && th < p;
    if (!it.pass) it.note = th >= p ? "theta must be below p" : "theta W + div F < 0";
    rep.items.push_back(it);
  }
  return rep;
}

CheckReport verify_Mp_equivalence(const Corpus& corpus, double p, const WeightFunction& wf, const GridSpec& grid,
                                  double tail_tol) {
  check_p(p, "verify_Mp_equivalence");
  const int n = grid.dim();
  if (n != wf.dim()) throw ArgumentError("verify_Mp_equivalence: dimension mismatch");
  const double cell = grid.cell_volume() * std::max(grid.tau(), 1.0 * (grid.nt == 1));

  struct SliceW {
    double s;
    Matrix Qsi;
    double dens;  // (2 pi)^{-N/2} det(Q_s)^{-1/2}
    Matrix Q, B;
  };
  std::vector<SliceW> sl;
  for (int k = 0; k < grid.nt; ++k) {
    const double s = grid.time(k);
    const auto& fam = wf.family();
    sl.push_back({s, fam.Qs_inverse(s), std::exp(-0.5 * n * std::log(2.0 * M_PI) - 0.5 * fam.log_det(s)),
                  fam.field().Q(s), fam.field().B(s)});
  }

  double rmin = HUGE_VAL, rmax = 0.0, incl = 0.0, tail = 0.0;
  std::string rmin_id, rmax_id, incl_id, tail_id;
  int used = 0;
  ojson rows = ojson::array();
  int idx[kMaxDim];
  for (const auto& m : corpus) {
    const auto& u = *m.fn;
    double n1 = 0.0, n2 = 0.0, lhs = 0.0, rhs = 0.0, edge = 0.0;
    for (int k = 0; k < grid.nt; ++k) {
      const auto& d = sl[static_cast<std::size_t>(k)];
      for (std::size_t j = 0; j < grid.slice_size(); ++j) {
        const Vector x = grid.point(j);
        const double uv = u.value(d.s, x);
        const Vector g = u.grad(d.s, x);
        const Matrix H = u.hess(d.s, x);
        const double us = u.ds(d.s, x);
        grid.multi_index(j, idx);
        bool on_edge = k == 0 || k == grid.nt - 1;
        for (int i = 0; i < n; ++i) on_edge = on_edge || idx[i] == 0 || idx[i] == grid.nx[static_cast<std::size_t>(i)] - 1;
        if (on_edge) edge = std::max(edge, std::abs(uv) * (1.0 + x.squaredNorm()));
        // Derivatives of M_p u divided by exp(Phi/p).
        const Vector dphi = d.Qsi * x;
        const Vector y = dphi;
        const double dsphi = 0.5 * y.dot(d.Q * y) - x.dot(d.Qsi * (d.B * x));
        double a1 = std::pow(std::abs(uv), p) + std::pow(std::abs(us + uv * dsphi / p), p);
        double grad_part = 0.0;
        for (int i = 0; i < n; ++i) grad_part += std::pow(std::abs(g[i] + uv * dphi[i] / p), p);
        a1 += grad_part;
        for (int i = 0; i < n; ++i)
          for (int l = 0; l < n; ++l) {
            const double vij = H(i, l) + (dphi[i] * g[l] + dphi[l] * g[i]) / p +
                               uv * (d.Qsi(i, l) / p + dphi[i] * dphi[l] / (p * p));
            a1 += std::pow(std::abs(vij), p);
          }
        n1 += d.dens * a1;
        lhs += d.dens * std::pow(x.norm() * std::abs(uv), p);
        rhs += d.dens * (grad_part + std::pow(std::abs(uv), p));
        double a2 = std::pow(std::abs(uv), p) + std::pow(std::abs(us), p) +
                    std::pow(x.squaredNorm() * std::abs(uv), p);
        for (int i = 0; i < n; ++i) a2 += std::pow(std::abs(g[i]), p);
        for (int i = 0; i < n; ++i)
          for (int l = 0; l < n; ++l) a2 += std::pow(std::abs(H(i, l)), p);
        n2 += a2;
      }
    }
    n1 = std::pow(n1 * cell, 1.0 / p);
    n2 = std::pow(n2 * cell, 1.0 / p);
    if (edge > tail) tail = edge, tail_id = m.id;
    ojson row = {{"id", m.id}, {"norm_weighted", n1}, {"norm_domain", n2}};
    if (n2 > 0.0) {
      ++used;
      const double r = n1 / n2;
      row["ratio"] = r;
      if (r < rmin) rmin = r, rmin_id = m.id;
      if (r > rmax) rmax = r, rmax_id = m.id;
      if (rhs > 0.0 && lhs / rhs > incl) incl = lhs / rhs, incl_id = m.id;
    } else {
      row["note"] = "zero function skipped";
    }
    rows.push_back(row);
  }
  CheckReport rep;
  rep.check = "mp_equivalence";
  rep.parameters = {{"field", wf.family().field().describe()}, {"p", p}, {"corpus_size", corpus.size()},
                    {"tau", grid.tau()}, {"h", grid.h(0)}};
  const double spread = used ? rmax / rmin : 1.0;
  rep.defect = tail;
  rep.tolerance = tail_tol;
  rep.pass = tail <= tail_tol && (used == 0 || (std::isfinite(spread) && rmin > 0.0));
  rep.details = {{"ratio_min", used ? number(rmin) : ojson(nullptr)},
                 {"ratio_min_id", rmin_id},
                 {"ratio_max", used ? number(rmax) : ojson(nullptr)},
                 {"ratio_max_id", rmax_id},
                 {"equivalence_spread", number(spread)},
                 {"weighted_poincare_constant", incl},
                 {"weighted_poincare_id", incl_id},
                 {"tail", tail},
                 {"tail_id", tail_id},
                 {"members", rows}};
  return rep;
}

}  // namespace oulab
