#include "oulab/test_functions.hpp"

#include "oulab/errors.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace oulab {

SpatialFunction TestFunction::slice(double s) const {
  return [this, s](const Vector& x) { return value(s, x); };
}

SpaceTimeFunction TestFunction::function() const {
  return [this](double s, const Vector& x) { return value(s, x); };
}

nlohmann::ordered_json TestFunction::describe() const {
  nlohmann::ordered_json j;
  j["family"] = family();
  j["params"] = params();
  return j;
}

namespace {

std::vector<double> to_list(const Vector& v) { return {v.data(), v.data() + v.size()}; }

class Constant final : public TestFunction {
 public:
  Constant(int n, double c) : n_(n), c_(c) {}
  int dim() const override { return n_; }
  double value(double, const Vector&) const override { return c_; }
  Vector grad(double, const Vector&) const override { return Vector::Zero(n_); }
  Matrix hess(double, const Vector&) const override { return Matrix::Zero(n_, n_); }
  double ds(double, const Vector&) const override { return 0.0; }
  std::optional<double> far_field() const override { return c_; }
  std::optional<double> lower_bound() const override { return c_; }
  std::string family() const override { return "constant"; }
  nlohmann::ordered_json params() const override { return {{"c", c_}}; }

 private:
  int n_;
  double c_;
};

class Linear final : public TestFunction {
 public:
  Linear(Vector v, double c) : v_(std::move(v)), c_(c) {}
  int dim() const override { return static_cast<int>(v_.size()); }
  double value(double, const Vector& x) const override { return v_.dot(x) + c_; }
  Vector grad(double, const Vector&) const override { return v_; }
  Matrix hess(double, const Vector&) const override { return Matrix::Zero(dim(), dim()); }
  double ds(double, const Vector&) const override { return 0.0; }
  std::string family() const override { return "linear"; }
  nlohmann::ordered_json params() const override { return {{"v", to_list(v_)}, {"c", c_}}; }

 private:
  Vector v_;
  double c_;
};

// q(y) exp(-a|x-c|^2 - b(s-d)^2), y = x_1 - c_1.
class PolyGaussian : public TestFunction {
 public:
  PolyGaussian(std::vector<double> poly, double a, Vector c, double b, double d)
      : q_(std::move(poly)), a_(a), c_(std::move(c)), b_(b), d_(d) {
    if (q_.empty()) q_.push_back(0.0);
    for (std::size_t k = 1; k < q_.size(); ++k) dq_.push_back(k * q_[k]);
    if (dq_.empty()) dq_.push_back(0.0);
    for (std::size_t k = 1; k < dq_.size(); ++k) ddq_.push_back(k * dq_[k]);
    if (ddq_.empty()) ddq_.push_back(0.0);
  }
  int dim() const override { return static_cast<int>(c_.size()); }

  double value(double s, const Vector& x) const override { return horner(q_, x[0] - c_[0]) * envelope(s, x); }

  Vector grad(double s, const Vector& x) const override {
    const double g = envelope(s, x);
    const double y = x[0] - c_[0];
    const double q = horner(q_, y);
    Vector out = -2.0 * a_ * q * g * (x - c_);
    out[0] += horner(dq_, y) * g;
    return out;
  }

  Matrix hess(double s, const Vector& x) const override {
    const int n = dim();
    const double g = envelope(s, x);
    const double y = x[0] - c_[0];
    const double q = horner(q_, y), q1 = horner(dq_, y), q2 = horner(ddq_, y);
    const Vector r = x - c_;
    // D^2 g = (4a^2 r r^T - 2a I) g, D g = -2a r g.
    Matrix H = q * g * (4.0 * a_ * a_ * r * r.transpose() - 2.0 * a_ * Matrix::Identity(n, n));
    for (int j = 0; j < n; ++j) {
      const double cross = q1 * (-2.0 * a_ * r[j] * g);
      H(0, j) += cross;
      H(j, 0) += cross;
    }
    H(0, 0) += q2 * g;
    return H;
  }

  double ds(double s, const Vector& x) const override { return -2.0 * b_ * (s - d_) * value(s, x); }

  std::optional<double> far_field() const override {
    if (a_ > 0.0) return 0.0;
    if (q_.size() == 1) return q_[0];
    return std::nullopt;
  }
  std::optional<double> lower_bound() const override {
    if (q_.size() == 1 && q_[0] >= 0.0) return 0.0;
    return std::nullopt;
  }
  std::string family() const override { return "poly_gaussian"; }
  nlohmann::ordered_json params() const override {
    return {{"poly", q_}, {"a", a_}, {"c", to_list(c_)}, {"b", b_}, {"d", d_}};
  }

 protected:
  static double horner(const std::vector<double>& p, double y) {
    double v = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * y + *it;
    return v;
  }
  double envelope(double s, const Vector& x) const {
    if (a_ == 0.0 && b_ == 0.0) return 1.0;
    return std::exp(-a_ * (x - c_).squaredNorm() - b_ * (s - d_) * (s - d_));
  }

  std::vector<double> q_, dq_, ddq_;
  double a_;
  Vector c_;
  double b_, d_;
};

class GaussianBump final : public PolyGaussian {
 public:
  GaussianBump(double a, Vector c, double b, double d) : PolyGaussian({1.0}, a, std::move(c), b, d) {}
  std::string family() const override { return "gaussian_bump"; }
  nlohmann::ordered_json params() const override {
    return {{"a", a_}, {"c", to_list(c_)}, {"b", b_}, {"d", d_}};
  }
};

class HermiteGaussian final : public PolyGaussian {
 public:
  HermiteGaussian(int k, double a, Vector c, double b, double d)
      : PolyGaussian(hermite_poly(k, a), a, std::move(c), b, d), k_(k) {}
  std::string family() const override { return "hermite_gaussian"; }
  nlohmann::ordered_json params() const override {
    return {{"k", k_}, {"a", a_}, {"c", to_list(c_)}, {"b", b_}, {"d", d_}};
  }

 private:
  // He_k(sqrt(2a) y) as a polynomial in y.
  static std::vector<double> hermite_poly(int k, double a) {
    std::vector<double> prev{1.0}, cur{0.0, 1.0};
    if (k == 0) return prev;
    for (int m = 1; m < k; ++m) {
      std::vector<double> next(static_cast<std::size_t>(m + 2), 0.0);
      for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += cur[i];
      for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= m * prev[i];
      prev = std::move(cur);
      cur = std::move(next);
    }
    const double scale = std::sqrt(2.0 * a);
    double f = 1.0;
    for (auto& coef : cur) {
      coef *= f;
      f *= scale;
    }
    return cur;
  }
  int k_;
};

class SmoothBump final : public TestFunction {
 public:
  SmoothBump(Vector c, double R, double d, double T) : c_(std::move(c)), R_(R), d_(d), T_(T) {}
  int dim() const override { return static_cast<int>(c_.size()); }

  double value(double s, const Vector& x) const override {
    const double q = arg(s, x);
    return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
  }
  Vector grad(double s, const Vector& x) const override {
    const double q = arg(s, x);
    if (q >= 1.0) return Vector::Zero(dim());
    return psi1(q) * 2.0 / (R_ * R_) * (x - c_);
  }
  Matrix hess(double s, const Vector& x) const override {
    const int n = dim();
    const double q = arg(s, x);
    if (q >= 1.0) return Matrix::Zero(n, n);
    const Vector dq = 2.0 / (R_ * R_) * (x - c_);
    return psi2(q) * dq * dq.transpose() + psi1(q) * 2.0 / (R_ * R_) * Matrix::Identity(n, n);
  }
  double ds(double s, const Vector& x) const override {
    if (!std::isfinite(T_)) return 0.0;
    const double q = arg(s, x);
    if (q >= 1.0) return 0.0;
    return psi1(q) * 2.0 * (s - d_) / (T_ * T_);
  }
  std::optional<double> far_field() const override { return 0.0; }
  std::optional<double> lower_bound() const override { return 0.0; }
  std::string family() const override { return "smooth_bump"; }
  nlohmann::ordered_json params() const override {
    nlohmann::ordered_json j{{"c", to_list(c_)}, {"R", R_}, {"d", d_}};
    j["T"] = std::isfinite(T_) ? nlohmann::ordered_json(T_) : nlohmann::ordered_json("inf");
    return j;
  }

 private:
  double arg(double s, const Vector& x) const {
    double q = (x - c_).squaredNorm() / (R_ * R_);
    if (std::isfinite(T_)) q += (s - d_) * (s - d_) / (T_ * T_);
    return q;
  }
  static double psi1(double q) {
    const double m = 1.0 - q;
    return -std::exp(-1.0 / m) / (m * m);
  }
  static double psi2(double q) {
    const double m = 1.0 - q;
    return std::exp(-1.0 / m) * (1.0 / (m * m * m * m) - 2.0 / (m * m * m));
  }
  Vector c_;
  double R_, d_, T_;
};

class Rescaled final : public TestFunction {
 public:
  Rescaled(TestFunctionPtr u, double lambda) : u_(std::move(u)), l_(lambda) {}
  int dim() const override { return u_->dim(); }
  double value(double s, const Vector& x) const override { return u_->value(l_ * l_ * s, l_ * x); }
  Vector grad(double s, const Vector& x) const override { return l_ * u_->grad(l_ * l_ * s, l_ * x); }
  Matrix hess(double s, const Vector& x) const override { return l_ * l_ * u_->hess(l_ * l_ * s, l_ * x); }
  double ds(double s, const Vector& x) const override { return l_ * l_ * u_->ds(l_ * l_ * s, l_ * x); }
  std::optional<double> far_field() const override { return u_->far_field(); }
  std::optional<double> lower_bound() const override { return u_->lower_bound(); }
  std::string family() const override { return "rescaled"; }
  nlohmann::ordered_json params() const override { return {{"lambda", l_}, {"inner", u_->describe()}}; }

 private:
  TestFunctionPtr u_;
  double l_;
};

class Scaled final : public TestFunction {
 public:
  Scaled(TestFunctionPtr u, double c) : u_(std::move(u)), c_(c) {}
  int dim() const override { return u_->dim(); }
  double value(double s, const Vector& x) const override { return c_ * u_->value(s, x); }
  Vector grad(double s, const Vector& x) const override { return c_ * u_->grad(s, x); }
  Matrix hess(double s, const Vector& x) const override { return c_ * u_->hess(s, x); }
  double ds(double s, const Vector& x) const override { return c_ * u_->ds(s, x); }
  std::optional<double> far_field() const override {
    auto f = u_->far_field();
    return f ? std::optional<double>(c_ * *f) : std::nullopt;
  }
  std::optional<double> lower_bound() const override {
    auto f = u_->lower_bound();
    return (f && c_ >= 0.0) ? std::optional<double>(c_ * *f) : std::nullopt;
  }
  std::string family() const override { return "scaled"; }
  nlohmann::ordered_json params() const override { return {{"c", c_}, {"inner", u_->describe()}}; }

 private:
  TestFunctionPtr u_;
  double c_;
};

void check_dim(int n) {
  if (n < 1 || n > kMaxDim) throw ArgumentError("test function dimension must be in 1..8");
}

}  // namespace

TestFunctionPtr make_constant(int n, double c) {
  check_dim(n);
  return std::make_shared<Constant>(n, c);
}

TestFunctionPtr make_linear(const Vector& v, double c) {
  check_dim(static_cast<int>(v.size()));
  return std::make_shared<Linear>(v, c);
}

TestFunctionPtr make_poly_gaussian(std::vector<double> poly, double a, const Vector& center, double b, double d) {
  check_dim(static_cast<int>(center.size()));
  if (a < 0.0 || b < 0.0) throw ArgumentError("poly_gaussian: widths must be nonnegative");
  return std::make_shared<PolyGaussian>(std::move(poly), a, center, b, d);
}

TestFunctionPtr make_gaussian_bump(double a, const Vector& center, double b, double d) {
  check_dim(static_cast<int>(center.size()));
  if (a < 0.0 || b < 0.0) throw ArgumentError("gaussian_bump: widths must be nonnegative");
  return std::make_shared<GaussianBump>(a, center, b, d);
}

TestFunctionPtr make_hermite_gaussian(int k, double a, const Vector& center, double b, double d) {
  check_dim(static_cast<int>(center.size()));
  if (k < 0 || a <= 0.0 || b < 0.0) throw ArgumentError("hermite_gaussian: need k >= 0, a > 0, b >= 0");
  return std::make_shared<HermiteGaussian>(k, a, center, b, d);
}

TestFunctionPtr make_smooth_bump(const Vector& center, double radius, double d, double half_width) {
  check_dim(static_cast<int>(center.size()));
  if (!(radius > 0.0) || !(half_width > 0.0)) throw ArgumentError("smooth_bump: radii must be positive");
  return std::make_shared<SmoothBump>(center, radius, d, half_width);
}

TestFunctionPtr make_rescaled(TestFunctionPtr u, double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("rescaled: lambda must be positive");
  return std::make_shared<Rescaled>(std::move(u), lambda);
}

TestFunctionPtr make_scaled(TestFunctionPtr u, double c) { return std::make_shared<Scaled>(std::move(u), c); }

Corpus bump_corpus(int n, int count, std::uint64_t seed, const BumpCorpusRanges& r) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto draw = [&](double lo, double hi) { return lo + (hi - lo) * U(rng); };
  Corpus out;
  for (int k = 0; k < count; ++k) {
    const double a = draw(r.a_lo, r.a_hi);
    const double b = draw(r.b_lo, r.b_hi);
    Vector c(n);
    for (int i = 0; i < n; ++i) c[i] = draw(r.c_lo, r.c_hi);
    const double d = draw(r.d_mid - r.d_spread, r.d_mid + r.d_spread);
    out.push_back({"bump" + std::to_string(k), make_gaussian_bump(a, c, b, d)});
  }
  return out;
}

Corpus kernel_corpus(int n, int count, std::uint64_t seed, bool nonnegative_only) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto draw = [&](double lo, double hi) { return lo + (hi - lo) * U(rng); };
  Corpus out;
  for (int k = 0; k < count; ++k) {
    const int kind = nonnegative_only ? (k % 2) * 2 : k % 3;
    Vector c(n);
    for (int i = 0; i < n; ++i) c[i] = draw(-1.0, 1.0);
    const double a = draw(0.25, 1.5);
    const std::string id = "phi" + std::to_string(k);
    if (kind == 0) {
      out.push_back({id, make_gaussian_bump(a, c)});
    } else if (kind == 1) {
      const int order = 1 + static_cast<int>(draw(0.0, 3.0));
      out.push_back({id, make_hermite_gaussian(std::min(order, 3), a, c)});
    } else {
      out.push_back({id, make_scaled(make_gaussian_bump(a, c), draw(0.5, 2.0))});
    }
  }
  return out;
}

}  // namespace oulab
