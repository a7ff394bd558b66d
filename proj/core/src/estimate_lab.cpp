#include "oulab/estimate_lab.hpp"

#include "oulab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

namespace oulab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_grid(const GridSpec& g, const char* who) {
  g.validate();
  if (g.nt < 4) throw ArgumentError(std::string(who) + ": need at least 4 time nodes");
  for (int i = 0; i < g.dim(); ++i)
    if (g.nx[static_cast<std::size_t>(i)] < 4) throw ArgumentError(std::string(who) + ": need at least 4 nodes per axis");
}

void check_p(double p, const char* who) {
  if (!(p >= 1.0)) throw ArgumentError(std::string(who) + ": p must be >= 1");
}

bool interior_node(const GridSpec& g, int k, const int* idx) {
  if (k == 0 || k == g.nt - 1) return false;
  for (int i = 0; i < g.dim(); ++i)
    if (idx[i] == 0 || idx[i] == g.nx[static_cast<std::size_t>(i)] - 1) return false;
  return true;
}

double cell_measure(const GridSpec& g) { return g.tau() * g.cell_volume(); }

/// Calls f(s, x) on every interior node.
template <class F>
void for_interior(const GridSpec& g, F&& f) {
  int idx[kMaxDim];
  for (int k = 1; k < g.nt - 1; ++k) {
    const double s = g.time(k);
    for (std::size_t j = 0; j < g.slice_size(); ++j) {
      g.multi_index(j, idx);
      if (!interior_node(g, 1, idx)) continue;
      f(s, g.point(j));
    }
  }
}

/// max |u| over the nodes excluded from the norms.
double boundary_tail(const TestFunction& u, const GridSpec& g) {
  double t = 0.0;
  int idx[kMaxDim];
  for (int k = 0; k < g.nt; ++k) {
    const double s = g.time(k);
    for (std::size_t j = 0; j < g.slice_size(); ++j) {
      g.multi_index(j, idx);
      if (interior_node(g, k, idx)) continue;
      t = std::max(t, std::abs(u.value(s, g.point(j))));
    }
  }
  return t;
}

/// Power sum -> norm, with p = inf passing through.
double root(double sum, double p, double cell) { return std::isinf(p) ? sum : std::pow(sum * cell, 1.0 / p); }

/// Accumulates |v|^p (or max |v| for p = inf).
void acc(double& sum, double v, double p) {
  const double a = std::abs(v);
  if (std::isinf(p)) sum = std::max(sum, a);
  else sum += std::pow(a, p);
}

double rel_drift(double base, double fine) {
  const double scale = std::max(std::abs(base), std::abs(fine));
  if (scale < 1e-12) return 0.0;
  return std::abs(fine - base) / std::max(std::abs(base), 1e-300);
}

/// Result of one sweep over the corpus on one grid.
struct Sweep {
  double worst = 0.0;
  std::string witness_id;
  ojson witness_params;
  std::vector<InequalityReport::Row> rows;
  ojson extra = ojson::object();
  int skipped = 0;
  std::vector<std::string> notes;

  void offer(const CorpusMember& m, double v, ojson values) {
    if (witness_id.empty() || v > worst) {
      worst = v;
      witness_id = m.id;
      witness_params = m.fn->describe();
    }
    rows.push_back({m.id, v, std::move(values)});
  }
};

/// Base sweep, tail assertion, refined sweep and drift.
InequalityReport assemble(const std::string& id, const Corpus& corpus, const EstimateOptions& opt,
                          const std::function<Sweep(const GridSpec&, bool)>& run) {
  InequalityReport r;
  r.id = id;
  r.corpus_size = static_cast<int>(corpus.size());
  r.drift_tol = opt.drift_tol;

  double tail = 0.0;
  std::string tail_id;
  for (const auto& m : corpus) {
    const double t = boundary_tail(*m.fn, opt.grid);
    if (t > tail) tail = t, tail_id = m.id;
  }
  r.extra["tail"] = tail;
  r.extra["tail_tolerance"] = opt.tail_tol;
  const bool tail_ok = tail <= opt.tail_tol;
  if (!tail_ok) {
    std::ostringstream os;
    os << "corpus member " << tail_id << " has boundary tail " << tail << " > " << opt.tail_tol;
    r.notes.push_back(os.str());
  }

  Sweep base = run(opt.grid, true);
  Sweep fine = run(refine(opt.grid), false);
  r.worst = base.worst;
  r.witness_id = base.witness_id;
  r.witness_params = base.witness_params;
  r.fine_worst = fine.worst;
  r.drift = rel_drift(base.worst, fine.worst);
  r.skipped = base.skipped;
  r.rows = std::move(base.rows);
  for (auto& n : base.notes) r.notes.push_back(std::move(n));
  for (auto it = base.extra.begin(); it != base.extra.end(); ++it) r.extra[it.key()] = it.value();
  if (!fine.extra.empty()) r.extra["refined"] = fine.extra;
  r.pass = tail_ok && std::isfinite(r.worst) && std::isfinite(r.fine_worst) && r.drift <= opt.drift_tol;
  return r;
}

struct NodeVals {
  double u, us, lap;
  Vector g;
  Matrix H;
};

NodeVals eval(const TestFunction& u, double s, const Vector& x) {
  NodeVals v{u.value(s, x), u.ds(s, x), 0.0, u.grad(s, x), u.hess(s, x)};
  v.lap = v.H.trace();
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// grid calculus

double lp_norm(const GridFunction& u, double p, NormInfo* info) {
  check_p(p, "lp_norm");
  const GridSpec& g = u.spec();
  if (g.nt < 3) throw ArgumentError("lp_norm: need at least 3 time nodes");
  int idx[kMaxDim];
  double sum = 0.0;
  std::size_t count = 0;
  for (int k = 1; k < g.nt - 1; ++k) {
    if (!u.retained(k)) continue;
    const auto sl = u.slice(k);
    for (std::size_t j = 0; j < g.slice_size(); ++j) {
      g.multi_index(j, idx);
      if (!interior_node(g, k, idx)) continue;
      acc(sum, sl[j], p);
      ++count;
    }
  }
  if (info) {
    info->interior_measure = static_cast<double>(count) * cell_measure(g);
    info->full_measure = g.window.length() * g.box.volume();
  }
  return root(sum, p, cell_measure(g));
}

std::vector<GridFunction> grad_x(const GridFunction& u) {
  const GridSpec& g = u.spec();
  const int n = g.dim();
  for (int i = 0; i < n; ++i)
    if (g.nx[static_cast<std::size_t>(i)] < 3) throw ArgumentError("grad_x: need at least 3 nodes per axis");
  std::vector<GridFunction> out(static_cast<std::size_t>(n), GridFunction(g));
  int idx[kMaxDim];
  for (int i = 0; i < n; ++i) {
    const std::size_t st = g.stride(i);
    const int m = g.nx[static_cast<std::size_t>(i)];
    const double h2 = 2.0 * g.h(i);
    auto& d = out[static_cast<std::size_t>(i)];
    for (int k = 0; k < g.nt; ++k) {
      const auto v = u.slice(k);
      auto o = d.slice(k);
      for (std::size_t j = 0; j < g.slice_size(); ++j) {
        g.multi_index(j, idx);
        const int a = idx[i];
        if (a == 0) o[j] = (-3.0 * v[j] + 4.0 * v[j + st] - v[j + 2 * st]) / h2;
        else if (a == m - 1) o[j] = (3.0 * v[j] - 4.0 * v[j - st] + v[j - 2 * st]) / h2;
        else o[j] = (v[j + st] - v[j - st]) / h2;
      }
    }
    for (int k = 0; k < g.nt; ++k) d.set_retained(k, u.retained(k));
  }
  return out;
}

GridFunction heat_op(const GridFunction& u) {
  const GridSpec& g = u.spec();
  check_grid(g, "heat_op");
  const int n = g.dim();
  GridFunction out(g);
  int idx[kMaxDim];
  const double tau = g.tau();
  for (int k = 0; k < g.nt; ++k) {
    const auto v = u.slice(k);
    auto o = out.slice(k);
    for (std::size_t j = 0; j < g.slice_size(); ++j) {
      g.multi_index(j, idx);
      double lap = 0.0;
      for (int i = 0; i < n; ++i) {
        const std::size_t st = g.stride(i);
        const int m = g.nx[static_cast<std::size_t>(i)];
        const double hh = g.h(i) * g.h(i);
        const int a = idx[i];
        if (a == 0) lap += (2.0 * v[j] - 5.0 * v[j + st] + 4.0 * v[j + 2 * st] - v[j + 3 * st]) / hh;
        else if (a == m - 1) lap += (2.0 * v[j] - 5.0 * v[j - st] + 4.0 * v[j - 2 * st] - v[j - 3 * st]) / hh;
        else lap += (v[j + st] - 2.0 * v[j] + v[j - st]) / hh;
      }
      double us;
      if (k == 0) us = (-3.0 * u.at(0, j) + 4.0 * u.at(1, j) - u.at(2, j)) / (2.0 * tau);
      else if (k == g.nt - 1) us = (3.0 * u.at(k, j) - 4.0 * u.at(k - 1, j) + u.at(k - 2, j)) / (2.0 * tau);
      else us = (u.at(k + 1, j) - u.at(k - 1, j)) / (2.0 * tau);
      o[j] = lap - us;
    }
  }
  for (int k = 0; k < g.nt; ++k) out.set_retained(k, u.retained(k));
  return out;
}

GridSpec refine(const GridSpec& g) {
  GridSpec r = g;
  r.nt = 2 * (g.nt - 1) + 1;
  for (auto& m : r.nx) m = 2 * (m - 1) + 1;
  return r;
}

// ---------------------------------------------------------------------------
// reports

ojson InequalityReport::to_json() const {
  ojson j;
  j["inequality"] = id;
  j["corpus_size"] = corpus_size;
  j["skipped"] = skipped;
  j["worst"] = number(worst);
  j["witness"] = {{"id", witness_id}, {"function", witness_params}};
  j["refined_worst"] = number(fine_worst);
  j["drift"] = number(drift);
  j["drift_tolerance"] = drift_tol;
  if (ceiling) j["ceiling"] = *ceiling;
  j["pass"] = pass;
  if (!notes.empty()) j["notes"] = notes;
  if (!extra.empty()) j["details"] = extra;
  ojson rs = ojson::array();
  for (const auto& r : rows) {
    ojson e = {{"id", r.id}, {"value", number(r.value)}};
    if (!r.values.empty()) e["values"] = r.values;
    rs.push_back(std::move(e));
  }
  j["members"] = std::move(rs);
  return j;
}

void InequalityReport::write_csv(std::ostream& os, bool header) const {
  if (header) os << "inequality,id,value\n";
  const auto prec = os.precision(17);
  for (const auto& r : rows) os << id << ',' << r.id << ',' << r.value << '\n';
  os.precision(prec);
}

EstimateOptions default_estimate_options(int n) {
  if (n < 1 || n > kMaxDim) throw ArgumentError("default_estimate_options: unsupported dimension");
  EstimateOptions o;
  const double tau = n == 1 ? 0.02 : 0.05;
  const double h = n == 1 ? 0.05 : 0.15;
  o.grid = GridSpec::uniform({0.0, 10.0}, tau, Box::cube(n, -6.0, 6.0), h);
  return o;
}

// ---------------------------------------------------------------------------
// verifiers

namespace {

struct RParts {
  double grad = 0.0, heat = 0.0, u = 0.0;
  [[nodiscard]] double R() const { return grad / std::sqrt(heat * u); }
};

RParts interpolation_parts(const TestFunction& fn, double p, const GridSpec& g) {
  const GridFunction u = GridFunction::sample(g, fn.function());
  const auto gr = grad_x(u);
  GridFunction mag(g);
  for (std::size_t q = 0; q < mag.values().size(); ++q) {
    double s = 0.0;
    for (const auto& d : gr) s += d.values()[q] * d.values()[q];
    mag.values()[q] = std::sqrt(s);
  }
  return {lp_norm(mag, p), lp_norm(heat_op(u), p), lp_norm(u, p)};
}

}  // namespace

InequalityReport verify_interpolation(const Corpus& corpus, double p, const EstimateOptions& opt, double scale_lambda,
                                      double scale_tol) {
  check_p(p, "verify_interpolation");
  check_grid(opt.grid, "verify_interpolation");
  if (!(scale_lambda > 0.0)) throw ArgumentError("verify_interpolation: scale must be positive");

  double scale_dev = 0.0;
  std::string scale_id;
  auto run = [&](const GridSpec& g, bool base) {
    Sweep sw;
    for (const auto& m : corpus) {
      const RParts r = interpolation_parts(*m.fn, p, g);
      if (!(r.u > 0.0) || !(r.heat > 0.0)) {
        ++sw.skipped;
        sw.notes.push_back(m.id + ": zero norm, skipped");
        continue;
      }
      ojson vals = {{"grad", r.grad}, {"heat", r.heat}, {"u", r.u}};
      if (base) {
        // u(lambda^2 s, lambda x) on the same grid
        const RParts rs = interpolation_parts(*make_rescaled(m.fn, scale_lambda), p, g);
        const double dev = std::abs(rs.R() / r.R() - 1.0);
        vals["R_rescaled"] = number(rs.R());
        if (dev > scale_dev || scale_id.empty()) scale_dev = dev, scale_id = m.id;
      }
      sw.offer(m, r.R(), std::move(vals));
    }
    return sw;
  };
  auto rep = assemble("interp", corpus, opt, run);
  rep.extra["p"] = p;
  rep.extra["rescaling"] = {{"lambda", scale_lambda}, {"max_deviation", scale_dev}, {"witness", scale_id},
                            {"tolerance", scale_tol}};
  if (!(scale_dev <= scale_tol)) {
    rep.pass = false;
    rep.notes.push_back("R not invariant under rescaling within tolerance");
  }
  return rep;
}

InequalityReport verify_weighted_gradient(const Corpus& corpus, const GeneralCoefficients::ScalarField& W, double p,
                                          const std::vector<double>& epsilons, const EstimateOptions& opt) {
  check_p(p, "verify_weighted_gradient");
  check_grid(opt.grid, "verify_weighted_gradient");
  if (epsilons.empty()) throw ArgumentError("verify_weighted_gradient: empty epsilon list");
  for (double e : epsilons)
    if (!(e > 0.0)) throw ArgumentError("verify_weighted_gradient: epsilons must be positive");

  double wmin = kInf;
  for_interior(opt.grid, [&](double s, const Vector& x) { wmin = std::min(wmin, W(s, x)); });
  if (!(wmin > 0.0)) throw PreconditionError("verify_weighted_gradient: W is not bounded below by a positive constant");

  auto run = [&](const GridSpec& g, bool) {
    Sweep sw;
    std::vector<double> alpha(epsilons.size(), 0.0);
    const double cell = cell_measure(g);
    for (const auto& m : corpus) {
      double L = 0.0, H = 0.0, Wn = 0.0;
      for_interior(g, [&](double s, const Vector& x) {
        const NodeVals v = eval(*m.fn, s, x);
        const double w = W(s, x);
        acc(L, std::sqrt(w) * v.g.norm(), p);
        acc(H, v.lap - v.us, p);
        acc(Wn, w * v.u, p);
      });
      L = root(L, p, cell), H = root(H, p, cell), Wn = root(Wn, p, cell);
      if (!(Wn > 0.0)) {
        ++sw.skipped;
        sw.notes.push_back(m.id + ": zero norm, skipped");
        continue;
      }
      double a_max = 0.0;
      ojson per = ojson::array();
      for (std::size_t e = 0; e < epsilons.size(); ++e) {
        const double eps = epsilons[e];
        const double a = eps * std::max(0.0, L - eps * H) / Wn;
        alpha[e] = std::max(alpha[e], a);
        a_max = std::max(a_max, a);
        per.push_back(a);
      }
      sw.offer(m, a_max, {{"weighted_grad", L}, {"heat", H}, {"Wu", Wn}, {"alpha", per}});
    }
    ojson tab = ojson::array();
    for (std::size_t e = 0; e < epsilons.size(); ++e) tab.push_back({{"eps", epsilons[e]}, {"alpha", alpha[e]}});
    sw.extra["alpha_table"] = tab;
    return sw;
  };
  auto rep = assemble("wgrad", corpus, opt, run);
  rep.extra["p"] = p;
  rep.extra["W_min"] = wmin;
  return rep;
}

InequalityReport verify_apriori(const Corpus& corpus, const GeneralCoefficients& gc, double p,
                                const EstimateOptions& opt) {
  check_p(p, "verify_apriori");
  check_grid(opt.grid, "verify_apriori");
  if (gc.n != opt.grid.dim()) throw ArgumentError("verify_apriori: dimension mismatch");

  const ConditionReport cr = check_A1_A5(gc, p, opt.grid);
  if (!cr.pass()) {
    std::string failed;
    for (const auto& it : cr.items)
      if (!it.pass) failed += (failed.empty() ? "" : ", ") + it.id + (it.note.empty() ? "" : " (" + it.note + ")");
    throw PreconditionError("verify_apriori: conditions fail: " + failed);
  }
  const auto& a2 = cr.item("A2").constants;
  const double theta = cr.item("A5").constants["theta"].get<double>();
  const double beta = a2["beta"].get<double>();
  const double gamma = a2["gamma"].get<double>();
  const double kappa = gc.declared.kappa.value_or(cr.item("A4").constants["kappa_hat"].get<double>());
  const Smallness sm = smallness(p, theta, beta, gamma, kappa, cr.M);
  if (!sm.pass) {
    std::ostringstream os;
    os << "verify_apriori: smallness condition fails for p = " << p << " (value " << sm.value << ", margin "
       << sm.margin << ")";
    throw PreconditionError(os.str());
  }

  const std::vector<double> eps_list{1.0, 0.5, 0.25};
  const int n = gc.n;
  auto run = [&](const GridSpec& g, bool) {
    Sweep sw;
    const double cell = cell_measure(g);
    double r1 = 0.0, r2 = 0.0, q1 = 0.0, q2 = 0.0;
    std::vector<double> corr(eps_list.size(), 0.0);
    for (const auto& m : corpus) {
      double Lu = 0.0, U = 0.0, Us = 0.0, G = 0.0, Hs = 0.0, Wu = 0.0, P = 0.0, WG = 0.0;
      for_interior(g, [&](double s, const Vector& x) {
        const NodeVals v = eval(*m.fn, s, x);
        const double w = gc.W(s, x);
        acc(Lu, gc.apply(*m.fn, s, x), p);
        acc(P, gc.principal(*m.fn, s, x), p);
        acc(U, v.u, p);
        acc(Us, v.us, p);
        for (int i = 0; i < n; ++i) {
          acc(G, v.g[i], p);
          for (int j = 0; j < n; ++j) acc(Hs, v.H(i, j), p);
        }
        acc(Wu, w * v.u, p);
        acc(WG, std::sqrt(std::max(0.0, w)) * v.g.norm(), p);
      });
      if (!(U > 0.0)) {
        ++sw.skipped;
        sw.notes.push_back(m.id + ": zero norm, skipped");
        continue;
      }
      const double w12 = std::pow((U + Us + G + Hs) * cell, 1.0 / p);
      const double dn = std::pow((U + Us + G + Hs + Wu) * cell, 1.0 / p);
      const double lu = root(Lu, p, cell), un = root(U, p, cell), pn = root(P, p, cell);
      const double wu = root(Wu, p, cell), wg = root(WG, p, cell);
      // ||u||_D <= C (||Lu|| + ||u||) and ||Lu|| + ||u|| <= C ||u||_D
      const double a = dn / (lu + un), b = (lu + un) / dn;
      r1 = std::max(r1, a), r2 = std::max(r2, b);
      q1 = std::max(q1, w12 / (pn + un)), q2 = std::max(q2, (pn + un) / w12);
      for (std::size_t e = 0; e < eps_list.size(); ++e)
        corr[e] = std::max(corr[e], eps_list[e] * std::max(0.0, wg - eps_list[e] * lu) / wu);
      sw.offer(m, std::max(a, b), {{"Lu", lu}, {"u", un}, {"D_norm", dn}, {"lower_ratio", a}, {"upper_ratio", b}});
    }
    sw.extra["lower_ratio"] = r1;
    sw.extra["upper_ratio"] = r2;
    sw.extra["C_p0"] = std::max(q1, q2);
    ojson tab = ojson::array();
    for (std::size_t e = 0; e < eps_list.size(); ++e) tab.push_back({{"eps", eps_list[e]}, {"alpha", corr[e]}});
    sw.extra["drift_bound_table"] = tab;
    return sw;
  };
  auto rep = assemble("apriori", corpus, opt, run);
  rep.extra["p"] = p;
  rep.extra["coefficients"] = gc.name;
  rep.extra["smallness"] = {{"value", sm.value}, {"margin", sm.margin}};
  rep.extra["conditions"] = cr.to_json();
  return rep;
}

InequalityReport verify_dissipativity(const Corpus& corpus, const GeneralCoefficients& gc, double p,
                                      const EstimateOptions& opt, double tol) {
  check_p(p, "verify_dissipativity");
  check_grid(opt.grid, "verify_dissipativity");
  if (gc.n != opt.grid.dim()) throw ArgumentError("verify_dissipativity: dimension mismatch");

  // sign condition on every grid node
  Witness w{0.0, Vector::Zero(gc.n), kInf};
  int idx[kMaxDim];
  const GridSpec& g0 = opt.grid;
  double scale = 1.0;
  for (int k = 0; k < g0.nt; ++k) {
    const double s = g0.time(k);
    for (std::size_t j = 0; j < g0.slice_size(); ++j) {
      g0.multi_index(j, idx);
      const Vector x = g0.point(j);
      const double V = gc.V(s, x);
      const double v = V + gc.div_F(s, x) / p;
      scale = std::max(scale, std::abs(V));
      if (v < w.value) w = {s, x, v};
    }
  }
  if (!(w.value >= -1e-12 * scale)) {
    InequalityReport r;
    r.id = "dissip";
    r.corpus_size = static_cast<int>(corpus.size());
    r.drift_tol = opt.drift_tol;
    r.pass = false;
    r.worst = kInf;
    r.fine_worst = kInf;
    r.notes.push_back("V + div F / p < 0 on the grid");
    r.extra["sign_condition"] = {{"min", number(w.value)}, {"witness", w.to_json()}};
    r.extra["p"] = p;
    return r;
  }

  auto run = [&](const GridSpec& g, bool) {
    Sweep sw;
    const double cell = cell_measure(g);
    for (const auto& m : corpus) {
      double D = 0.0, U = 0.0;
      for_interior(g, [&](double s, const Vector& x) {
        const double u = m.fn->value(s, x);
        const double a = std::abs(u);
        U = std::max(U, a);
        if (p < 2.0 && a < 1e-12) return;
        D += gc.apply(*m.fn, s, x) * u * (p == 2.0 ? 1.0 : std::pow(a, p - 2.0));
      });
      D *= cell;
      sw.offer(m, D, {{"value", D}, {"sup_u", U}});
    }
    return sw;
  };
  auto rep = assemble("dissip", corpus, opt, run);
  rep.ceiling = tol;
  rep.extra["p"] = p;
  rep.extra["sign_condition"] = {{"min", w.value}, {"witness", w.to_json()}};
  if (!(rep.worst <= tol)) {
    rep.pass = false;
    rep.notes.push_back("int (L u) u |u|^(p-2) exceeds the tolerance for " + rep.witness_id);
  }
  return rep;
}

InequalityReport verify_L1_and_sup(const Corpus& corpus, const GeneralCoefficients& gc, const EstimateOptions& opt) {
  check_grid(opt.grid, "verify_L1_and_sup");
  if (gc.n != opt.grid.dim()) throw ArgumentError("verify_L1_and_sup: dimension mismatch");
  const int n = gc.n;
  const Matrix I = Matrix::Identity(n, n);
  double adev = 0.0, theta_hat = 0.0;
  for_interior(opt.grid, [&](double s, const Vector& x) {
    adev = std::max(adev, (gc.a(s, x) - I).cwiseAbs().maxCoeff());
    const double W = gc.W(s, x);
    if (W > 0.0) theta_hat = std::max(theta_hat, -gc.div_F(s, x) / W);
  });
  if (adev > 1e-12) throw PreconditionError("verify_L1_and_sup: the L1 and sup-norm estimates require the Laplacian (a = I)");
  const double theta = gc.declared.theta.value_or(theta_hat);
  if (!(theta < 1.0)) throw PreconditionError("verify_L1_and_sup: theta must be below 1");
  if (theta_hat > theta * (1.0 + 1e-9) + 1e-12)
    throw PreconditionError("verify_L1_and_sup: theta W + div F < 0 with the declared theta");

  double l1_margin = kInf;
  std::string l1_id;
  auto run = [&](const GridSpec& g, bool base) {
    Sweep sw;
    const double cell = cell_measure(g);
    double r1 = 0.0, r2 = 0.0, qmin = kInf;
    for (const auto& m : corpus) {
      double L1 = 0.0, W1 = 0.0, Linf = 0.0, Uinf = 0.0, Hinf = 0.0, Vinf = 0.0;
      for_interior(g, [&](double s, const Vector& x) {
        const NodeVals v = eval(*m.fn, s, x);
        const double Lu = gc.apply(*m.fn, s, x);
        L1 += std::abs(Lu);
        W1 += std::abs(gc.W(s, x) * v.u);
        Linf = std::max(Linf, std::abs(Lu));
        Uinf = std::max(Uinf, std::abs(v.u));
        Hinf = std::max(Hinf, std::abs(v.lap - v.us));
        Vinf = std::max(Vinf, std::abs(gc.V(s, x) * v.u));
      });
      if (!(Uinf > 0.0)) {
        ++sw.skipped;
        sw.notes.push_back(m.id + ": zero function, trivially satisfied");
        continue;
      }
      L1 *= cell, W1 *= cell;
      const double q = L1 / W1;  // must be >= 1 - theta
      qmin = std::min(qmin, q);
      if (base && q < l1_margin) l1_margin = q, l1_id = m.id;
      const double dn = std::max(Hinf, Vinf);
      const double a = dn / (Linf + Uinf), b = (Linf + Uinf) / dn;
      r1 = std::max(r1, a), r2 = std::max(r2, b);
      sw.offer(m, std::max(a, b), {{"Lu_1", L1}, {"Wu_1", W1}, {"l1_ratio", q}, {"Lu_inf", Linf}, {"D_inf", dn}});
    }
    sw.extra["C_inf_lower"] = r1;
    sw.extra["C_inf_upper"] = r2;
    sw.extra["l1_ratio_min"] = number(qmin);
    return sw;
  };
  auto rep = assemble("l1", corpus, opt, run);
  rep.extra["theta"] = theta;
  rep.extra["theta_hat"] = theta_hat;
  rep.extra["l1"] = {{"min_ratio", number(l1_margin)}, {"witness", l1_id}, {"one_minus_theta", 1.0 - theta},
                     {"margin", number(l1_margin - (1.0 - theta))}};
  if (std::isfinite(l1_margin) && l1_margin < (1.0 - theta) * (1.0 - 1e-9)) {
    rep.pass = false;
    rep.notes.push_back("(1 - theta)||W u||_1 > ||L u||_1 for " + l1_id);
  }
  // the L1 ratio itself must also be refinement-stable
  if (rep.extra.contains("refined") && std::isfinite(l1_margin)) {
    const double fine = rep.extra["refined"]["l1_ratio_min"].get<double>();
    const double d = rel_drift(l1_margin, fine);
    rep.extra["l1"]["drift"] = d;
    if (d > rep.drift_tol) rep.pass = false;
  }
  return rep;
}

}  // namespace oulab
