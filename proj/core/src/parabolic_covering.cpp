#include "oulab/parabolic_covering.hpp"

#include "oulab/errors.hpp"
#include "oulab/expression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace oulab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ojson point_json(double s, const Vector& x) { return {{"s", s}, {"x", to_json(x)}}; }

double dist0(double s, const Vector& x) { return std::max(std::sqrt(std::abs(s)), x.norm()); }

struct Sampler {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> U{0.0, 1.0};
  explicit Sampler(std::uint64_t seed) : rng(seed) {}
  double draw(double lo, double hi) { return lo + (hi - lo) * U(rng); }
  void point(const CoverRegion& R, double& s, Vector& x) {
    s = draw(R.window.lo, R.window.hi);
    x.resize(R.dim());
    for (int i = 0; i < R.dim(); ++i) x[i] = draw(R.box.lo[i], R.box.hi[i]);
  }
};

void check_region(const CoverRegion& R) {
  const int n = R.dim();
  if (n < 1 || n > kMaxDim || R.box.hi.size() != n) throw ArgumentError("cover: invalid region dimension");
  if (!(R.window.hi >= R.window.lo) || !std::isfinite(R.window.lo) || !std::isfinite(R.window.hi))
    throw ArgumentError("cover: invalid time window");
  for (int i = 0; i < n; ++i)
    if (!(R.box.hi[i] >= R.box.lo[i]) || !std::isfinite(R.box.lo[i]) || !std::isfinite(R.box.hi[i]))
      throw ArgumentError("cover: invalid box");
}

int node_count(double len, double step) {
  if (len <= 0.0) return 1;
  return static_cast<int>(std::ceil(len / step - 1e-9)) + 1;
}

}  // namespace

double pdist(double t, const Vector& x, double s, const Vector& y) {
  return std::max(std::sqrt(std::abs(t - s)), (x - y).norm());
}

bool ParabolicBall::contains(double s, const Vector& x) const {
  return std::abs(s - s0) < r * r && (x - x0).norm() < r;
}

bool ParabolicBall::contains_metric(double s, const Vector& x) const { return pdist(s, x, s0, x0) < r; }

bool ParabolicBall::intersects(const ParabolicBall& o) const {
  return std::abs(s0 - o.s0) < r * r + o.r * o.r && (x0 - o.x0).norm() < r + o.r;
}

RadiusFunction RadiusFunction::from_expression(const std::string& text, int n, double kappa, double delta) {
  const Expression e = Expression::parse(text, Expression::space_time_variables(n));
  RadiusFunction f;
  f.rho = [e](double s, const Vector& x) { return e.at(s, x); };
  f.kappa = kappa;
  f.delta = delta;
  f.text = text;
  return f;
}

OverlapBound overlap_bound(double kappa, double lambda, int n) {
  if (n < 1) throw ArgumentError("overlap_bound: N must be positive");
  if (!(kappa >= 0.0) || !(lambda >= 1.0)) throw ArgumentError("overlap_bound: need kappa >= 0 and lambda >= 1");
  if (kappa * lambda >= 1.0) throw ParameterError("overlap_bound: kappa * lambda must be below 1");
  using ld = long double;
  const ld k = kappa, l = lambda;
  const ld ratio = (k * k * l * l + 2 * k * l * (1 + 3 * l) + 6 * l + 1) / ((1 - k * l) * (1 - k * l));
  ld pw = 1;
  for (int i = 0; i < n + 2; ++i) pw *= ratio;
  // snap values that are integers up to rounding before taking the floor
  const ld near = std::round(pw);
  if (std::abs(pw - near) <= 1e-12L * std::max<ld>(1, pw)) pw = near;
  OverlapBound b;
  b.ratio = static_cast<double>(ratio);
  b.xi = static_cast<double>(std::floor(pw));
  b.zeta = 2.0 * b.xi + 2.0;
  return b;
}

ojson Covering::to_json() const {
  ojson j;
  j["region"] = {{"window", {region.window.lo, region.window.hi}},
                 {"box_lo", oulab::to_json(region.box.lo)},
                 {"box_hi", oulab::to_json(region.box.hi)}};
  j["constants"] = {{"kappa", kappa}, {"lambda", lambda}, {"N", dim()}, {"omega", number(omega)}, {"delta", delta}};
  j["annuli"] = annuli;
  j["candidates"] = candidates;
  j["cell_radius"] = cell_radius;
  j["spacing"] = {{"ds", ds}, {"dx", dx}};
  ojson bs = ojson::array();
  for (const auto& b : balls)
    bs.push_back({{"annulus", b.annulus},
                  {"order", b.order},
                  {"s0", b.ball.s0},
                  {"x0", oulab::to_json(b.ball.x0)},
                  {"r", b.ball.r},
                  {"color", b.color}});
  j["balls"] = std::move(bs);
  return j;
}

void Covering::write_csv(std::ostream& os) const {
  const auto prec = os.precision(17);
  os << "annulus,order,s0";
  for (int i = 1; i <= dim(); ++i) os << ",x" << i;
  os << ",r,color\n";
  for (const auto& b : balls) {
    os << b.annulus << ',' << b.order << ',' << b.ball.s0;
    for (int i = 0; i < dim(); ++i) os << ',' << b.ball.x0[i];
    os << ',' << b.ball.r << ',' << b.color << '\n';
  }
  os.precision(prec);
}

Covering greedy_cover(const RadiusFunction& rho, const CoverRegion& region, double lambda, const CoverOptions& opt) {
  check_region(region);
  if (!rho.rho) throw ArgumentError("greedy_cover: no radius function");
  if (!(lambda >= 1.0)) throw ArgumentError("greedy_cover: lambda must be >= 1");
  if (!(rho.kappa >= 0.0)) throw ArgumentError("greedy_cover: kappa must be nonnegative");
  if (rho.kappa * lambda >= 1.0) throw ParameterError("greedy_cover: kappa * lambda must be below 1");
  if (!(rho.delta > 0.0)) throw ArgumentError("greedy_cover: delta must be positive");

  const int n = region.dim();
  const double T = region.window.length();
  const Vector L = region.box.hi - region.box.lo;

  double ds = 0.0, dx = 0.0;
  if (opt.ds && opt.dx) {
    ds = *opt.ds, dx = *opt.dx;
    if (!(ds > 0.0) || !(dx > 0.0)) throw ArgumentError("greedy_cover: spacings must be positive");
  } else {
    // coarse estimate of min rho, lowered by the Lipschitz slack of the probe grid
    const int m = n <= 2 ? 33 : 9;
    double mn = kInf, cs = 0.0;
    Vector x(n);
    const int ms = T > 0.0 ? m : 1;
    std::vector<int> nx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) nx[static_cast<std::size_t>(i)] = L[i] > 0.0 ? m : 1;
    std::size_t total = 1;
    for (int v : nx) total *= static_cast<std::size_t>(v);
    double hx = 0.0;
    for (int i = 0; i < n; ++i) hx = std::max(hx, L[i] / std::max(1, nx[static_cast<std::size_t>(i)] - 1));
    cs = std::max(std::sqrt(T / std::max(1, ms - 1) / 2.0), std::sqrt(1.0 * n) * hx / 2.0);
    for (int k = 0; k < ms; ++k) {
      const double s = ms > 1 ? region.window.lo + T * k / (ms - 1) : region.window.lo;
      for (std::size_t f = 0; f < total; ++f) {
        std::size_t r = f;
        for (int i = 0; i < n; ++i) {
          const int c = nx[static_cast<std::size_t>(i)];
          const int a = static_cast<int>(r % static_cast<std::size_t>(c));
          r /= static_cast<std::size_t>(c);
          x[i] = c > 1 ? region.box.lo[i] + L[i] * a / (c - 1) : region.box.lo[i];
        }
        mn = std::min(mn, rho(s, x));
      }
    }
    if (!(mn > 0.0)) throw DeclarationError("greedy_cover: rho is not positive on the region");
    const double rmin = std::max(mn - rho.kappa * cs, 0.25 * mn);
    const double cell = rmin / 4.5;
    dx = 2.0 * cell / std::sqrt(1.0 * n);
    ds = 2.0 * cell * cell;
  }

  const int nt = node_count(T, ds);
  std::vector<int> nx(static_cast<std::size_t>(n));
  double total = nt;
  for (int i = 0; i < n; ++i) total *= (nx[static_cast<std::size_t>(i)] = node_count(L[i], dx));
  if (total > static_cast<double>(opt.max_candidates))
    throw ResolutionError("greedy_cover: candidate grid too large (" + std::to_string(static_cast<long long>(total)) +
                          " nodes)");
  const double ts = nt > 1 ? T / (nt - 1) : 0.0;
  double hx = 0.0;
  std::vector<double> hs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int c = nx[static_cast<std::size_t>(i)];
    hs[static_cast<std::size_t>(i)] = c > 1 ? L[i] / (c - 1) : 0.0;
    hx = std::max(hx, hs[static_cast<std::size_t>(i)]);
  }
  // farthest point of a candidate's cell
  double hn = 0.0;
  for (double h : hs) hn += h * h;
  const double cell = std::max(std::sqrt(ts / 2.0), std::sqrt(hn) / 2.0);

  struct Cand {
    double s;
    Vector x;
    double r;
    int l;
  };
  const double omega = rho.kappa > 0.0 ? 2.001 * rho.delta / rho.kappa : kInf;
  std::vector<Cand> cands;
  cands.reserve(static_cast<std::size_t>(total));
  double rmin = kInf;
  Vector x(n);
  const std::size_t space = static_cast<std::size_t>(total) / static_cast<std::size_t>(nt);
  for (int k = 0; k < nt; ++k) {
    const double s = region.window.lo + ts * k;
    for (std::size_t f = 0; f < space; ++f) {
      std::size_t r = f;
      for (int i = 0; i < n; ++i) {
        const int c = nx[static_cast<std::size_t>(i)];
        x[i] = region.box.lo[i] + hs[static_cast<std::size_t>(i)] * static_cast<double>(r % static_cast<std::size_t>(c));
        r /= static_cast<std::size_t>(c);
      }
      const double v = rho(s, x);
      if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << "greedy_cover: rho(" << s << ", " << x.transpose() << ") = " << v << " is not positive";
        throw DeclarationError(os.str());
      }
      if (v > rho.delta * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "greedy_cover: rho(" << s << ", " << x.transpose() << ") = " << v << " exceeds the declared sup "
           << rho.delta;
        throw DeclarationError(os.str());
      }
      rmin = std::min(rmin, v);
      const int l = std::isinf(omega) ? 1 : std::max(1, static_cast<int>(std::ceil(dist0(s, x) / omega)));
      cands.push_back({s, x, v, l});
    }
  }
  if (cell > rmin / 4.0) {
    std::ostringstream os;
    os << "greedy_cover: candidate cell radius " << cell << " exceeds min rho / 4 = " << rmin / 4.0;
    throw ResolutionError(os.str());
  }

  // annulus, then rho descending, then lexicographic (s, x1, ..., xN)
  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& A = cands[a];
    const auto& B = cands[b];
    if (A.l != B.l) return A.l < B.l;
    if (A.r != B.r) return A.r > B.r;
    if (A.s != B.s) return A.s < B.s;
    for (int i = 0; i < n; ++i)
      if (A.x[i] != B.x[i]) return A.x[i] < B.x[i];
    return false;
  });

  Covering cov;
  cov.region = region;
  cov.kappa = rho.kappa;
  cov.lambda = lambda;
  cov.delta = rho.delta;
  cov.omega = omega;
  cov.cell_radius = cell;
  cov.ds = ts;
  cov.dx = hx;
  cov.candidates = cands.size();

  std::vector<unsigned char> covered(cands.size(), 0);
  std::size_t begin = 0;
  while (begin < order.size()) {
    const int l = cands[order[begin]].l;
    std::size_t end = begin;
    while (end < order.size() && cands[order[end]].l == l) ++end;
    int sel = 0;
    for (std::size_t q = begin; q < end; ++q) {
      if (covered[order[q]]) continue;
      const auto& c = cands[order[q]];
      ParabolicBall B{c.s, c.x, c.r};
      cov.balls.push_back({l, ++sel, B, 0});
      // only grid nodes inside the bounding box of the ball can be covered
      auto range = [](double c, double r, double lo, double h, int m, int& a, int& b) {
        if (h <= 0.0) {
          a = 0, b = m - 1;
          return;
        }
        a = std::max(0, static_cast<int>(std::floor((c - r - lo) / h)));
        b = std::min(m - 1, static_cast<int>(std::ceil((c + r - lo) / h)));
      };
      int k0, k1;
      range(B.s0, B.r * B.r, region.window.lo, ts, nt, k0, k1);
      int lo[kMaxDim], hi[kMaxDim], at[kMaxDim];
      bool empty = k0 > k1;
      for (int i = 0; i < n; ++i) {
        range(B.x0[i], B.r, region.box.lo[i], hs[static_cast<std::size_t>(i)], nx[static_cast<std::size_t>(i)], lo[i],
              hi[i]);
        empty = empty || lo[i] > hi[i];
        at[i] = lo[i];
      }
      if (empty) continue;
      for (int k = k0; k <= k1; ++k) {
        for (int i = 0; i < n; ++i) at[i] = lo[i];
        while (true) {
          std::size_t f = 0, st = 1;
          for (int i = 0; i < n; ++i) {
            f += static_cast<std::size_t>(at[i]) * st;
            st *= static_cast<std::size_t>(nx[static_cast<std::size_t>(i)]);
          }
          const std::size_t id = static_cast<std::size_t>(k) * space + f;
          if (!covered[id] && cands[id].l == l && pdist(cands[id].s, cands[id].x, B.s0, B.x0) + cell < B.r)
            covered[id] = 1;
          int i = 0;
          while (i < n && ++at[i] > hi[i]) at[i] = lo[i], ++i;
          if (i == n) break;
        }
      }
    }
    cov.annuli = std::max(cov.annuli, l);
    begin = end;
  }
  return cov;
}

CheckReport verify_cover(const Covering& cov, int probes, std::uint64_t seed) {
  if (probes < 1) throw ArgumentError("verify_cover: probes must be positive");
  const int n = cov.dim();
  const OverlapBound ob = overlap_bound(cov.kappa, cov.lambda, n);
  Sampler S(seed);
  int uncovered = 0, max_overlap = 0;
  ojson miss = nullptr, crowd = nullptr;
  double s;
  Vector x(n);
  for (int q = 0; q < probes; ++q) {
    S.point(cov.region, s, x);
    int in = 0, inl = 0;
    for (const auto& b : cov.balls) {
      if (b.ball.contains(s, x)) ++in;
      if (b.ball.dilate(cov.lambda).contains(s, x)) ++inl;
    }
    if (in == 0) {
      if (uncovered == 0) miss = point_json(s, x);
      ++uncovered;
    }
    if (inl > max_overlap) max_overlap = inl, crowd = point_json(s, x);
  }
  CheckReport r;
  r.check = "cover";
  r.parameters = {{"probes", probes}, {"seed", seed}, {"lambda", cov.lambda}, {"kappa", cov.kappa}, {"N", n}};
  const double excess = std::max(0.0, max_overlap - ob.zeta);
  r.defect = uncovered + excess;
  r.tolerance = 0.0;
  r.pass = uncovered == 0 && excess == 0.0;
  r.details = {{"balls", cov.balls.size()},
               {"coverage", 1.0 - static_cast<double>(uncovered) / probes},
               {"uncovered", uncovered},
               {"max_overlap", max_overlap},
               {"xi", ob.xi},
               {"zeta", ob.zeta}};
  if (!miss.is_null()) r.details["uncovered_witness"] = miss;
  if (!crowd.is_null()) r.details["overlap_witness"] = crowd;
  return r;
}

Covering partition_disjoint(const Covering& cov, double lambda) {
  const OverlapBound ob = overlap_bound(cov.kappa, lambda, cov.dim());
  Covering out = cov;
  out.lambda = lambda;
  const int palette = static_cast<int>(std::min(ob.xi + 1.0, 1e9));
  std::size_t begin = 0;
  auto& bs = out.balls;
  while (begin < bs.size()) {
    std::size_t end = begin;
    while (end < bs.size() && bs[end].annulus == bs[begin].annulus) ++end;
    std::vector<int> local(end - begin, 0);
    std::vector<unsigned char> used;
    for (std::size_t i = begin; i < end; ++i) {
      const ParabolicBall Bi = bs[i].ball.dilate(lambda);
      used.assign(end - begin + 2, 0);
      for (std::size_t j = begin; j < i; ++j)
        if (Bi.intersects(bs[j].ball.dilate(lambda))) {
          const int c = local[j - begin];
          if (c < static_cast<int>(used.size())) used[static_cast<std::size_t>(c)] = 1;
        }
      int c = 1;
      while (used[static_cast<std::size_t>(c)]) ++c;
      if (c > palette) {
        std::ostringstream os;
        os << "partition_disjoint: annulus " << bs[i].annulus << " needs color " << c << " > xi + 1 = " << palette;
        throw TheoremViolationError(os.str());
      }
      local[i - begin] = c;
      // odd annuli take the odd colors, even annuli the even ones
      bs[i].color = 2 * (c - 1) + (bs[i].annulus % 2 == 1 ? 1 : 2);
    }
    begin = end;
  }
  return out;
}

CheckReport verify_coloring(const Covering& cov, double lambda) {
  CheckReport r;
  r.check = "coloring";
  r.parameters = {{"lambda", lambda}, {"balls", cov.balls.size()}};
  r.tolerance = 0.0;
  int bad = 0, uncolored = 0, maxc = 0;
  ojson witness = nullptr;
  for (std::size_t i = 0; i < cov.balls.size(); ++i) {
    const auto& a = cov.balls[i];
    if (a.color <= 0) ++uncolored;
    maxc = std::max(maxc, a.color);
    const ParabolicBall A = a.ball.dilate(lambda);
    for (std::size_t j = i + 1; j < cov.balls.size(); ++j) {
      const auto& b = cov.balls[j];
      if (a.color != b.color || a.color <= 0) continue;
      if (A.intersects(b.ball.dilate(lambda))) {
        if (bad == 0)
          witness = {{"color", a.color},
                     {"first", {{"annulus", a.annulus}, {"order", a.order}}},
                     {"second", {{"annulus", b.annulus}, {"order", b.order}}}};
        ++bad;
      }
    }
  }
  const OverlapBound ob = overlap_bound(cov.kappa, lambda, cov.dim());
  r.defect = bad + uncolored;
  r.pass = bad == 0 && uncolored == 0 && maxc <= ob.zeta;
  r.details = {{"intersecting_pairs", bad}, {"uncolored", uncolored}, {"colors_used", maxc}, {"zeta", ob.zeta}};
  if (!witness.is_null()) r.details["witness"] = witness;
  return r;
}

CheckReport verify_step2(const Covering& cov) {
  CheckReport r;
  r.check = "step2";
  r.parameters = {{"balls", cov.balls.size()}};
  r.tolerance = 0.0;
  int overlaps = 0, monotone = 0, outside = 0;
  ojson witness = ojson::object();
  for (std::size_t i = 0; i < cov.balls.size(); ++i) {
    const auto& a = cov.balls[i];
    const double d0 = dist0(a.ball.s0, a.ball.x0);
    if (!std::isinf(cov.omega) &&
        (d0 < cov.omega * (a.annulus - 1) * (1.0 - 1e-12) || d0 > cov.omega * a.annulus * (1.0 + 1e-12))) {
      if (outside++ == 0) witness["outside"] = {{"annulus", a.annulus}, {"order", a.order}, {"d0", d0}};
    }
    const ParabolicBall A = a.ball.dilate(1.0 / 3.0);
    for (std::size_t j = i + 1; j < cov.balls.size(); ++j) {
      const auto& b = cov.balls[j];
      if (b.annulus != a.annulus) continue;
      if (A.intersects(b.ball.dilate(1.0 / 3.0)) && overlaps++ == 0)
        witness["overlap"] = {{"annulus", a.annulus}, {"orders", {a.order, b.order}}};
      if (a.ball.r < 0.75 * b.ball.r && monotone++ == 0)
        witness["monotone"] = {{"annulus", a.annulus}, {"orders", {a.order, b.order}}};
    }
  }
  r.defect = overlaps + monotone + outside;
  r.pass = r.defect == 0;
  r.details = {{"contracted_overlaps", overlaps}, {"monotone_violations", monotone}, {"centers_outside", outside}};
  if (!witness.empty()) r.details["witness"] = witness;
  return r;
}

ojson LipschitzEstimate::to_json() const {
  return {{"kappa_hat", kappa_hat}, {"pairs", pairs}, {"a", point_json(s_a, x_a)}, {"b", point_json(s_b, x_b)}};
}

LipschitzEstimate lipschitz_estimate(const RadiusFunction& rho, const CoverRegion& region, int samples,
                                     std::uint64_t seed) {
  check_region(region);
  if (samples < 2) throw ArgumentError("lipschitz_estimate: need at least 2 samples");
  const int n = region.dim();
  Sampler S(seed);
  std::vector<double> ss(static_cast<std::size_t>(samples)), vs(ss.size());
  std::vector<Vector> xs(ss.size());
  for (std::size_t i = 0; i < ss.size(); ++i) {
    S.point(region, ss[i], xs[i]);
    vs[i] = rho(ss[i], xs[i]);
  }
  LipschitzEstimate e;
  auto offer = [&](double s1, const Vector& x1, double v1, double s2, const Vector& x2, double v2) {
    const double d = pdist(s1, x1, s2, x2);
    ++e.pairs;
    if (!(d > 0.0)) return;
    const double q = std::abs(v1 - v2) / d;
    if (q > e.kappa_hat) e.kappa_hat = q, e.s_a = s1, e.x_a = x1, e.s_b = s2, e.x_b = x2;
  };
  for (std::size_t i = 0; i < ss.size(); ++i)
    for (std::size_t j = i + 1; j < ss.size(); ++j) offer(ss[i], xs[i], vs[i], ss[j], xs[j], vs[j]);
  // short pairs: a step of d-length about 1e-3 of the region size
  double scale = std::sqrt(std::max(region.window.length(), 0.0));
  for (int i = 0; i < n; ++i) scale = std::max(scale, region.box.hi[i] - region.box.lo[i]);
  const double step = 1e-3 * std::max(scale, 1e-6);
  for (std::size_t i = 0; i < ss.size(); ++i) {
    Vector y = xs[i];
    for (int k = 0; k < n; ++k) y[k] += step * (2.0 * S.U(S.rng) - 1.0);
    const double t = ss[i] + step * step * (2.0 * S.U(S.rng) - 1.0);
    offer(ss[i], xs[i], vs[i], t, y, rho(t, y));
  }
  if (e.kappa_hat > rho.kappa * (1.0 + 1e-9) + 1e-12) {
    std::ostringstream os;
    os << "lipschitz_estimate: sampled modulus " << e.kappa_hat << " exceeds the declared kappa " << rho.kappa
       << " between (" << e.s_a << ", " << e.x_a.transpose() << ") and (" << e.s_b << ", " << e.x_b.transpose()
       << ")";
    throw DeclarationError(os.str());
  }
  return e;
}

}  // namespace oulab
