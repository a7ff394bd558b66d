#include "oulab/coefficient_field.hpp"

#include "oulab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace oulab {

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::Constant: return "constant";
    case FieldKind::ClosedForm: return "closedform";
    case FieldKind::Table: return "table";
  }
  return "unknown";
}

namespace {

/// Monotone piecewise cubic Hermite interpolant of one scalar series.
struct Pchip {
  std::vector<double> t, y, d;

  Pchip(std::vector<double> times, std::vector<double> values) : t(std::move(times)), y(std::move(values)) {
    const std::size_t n = t.size();
    d.assign(n, 0.0);
    if (n == 2) {
      d[0] = d[1] = (y[1] - y[0]) / (t[1] - t[0]);
      return;
    }
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = t[k + 1] - t[k];
      delta[k] = (y[k + 1] - y[k]) / h[k];
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (delta[k - 1] * delta[k] <= 0.0) {
        d[k] = 0.0;
      } else {
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
      }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  static double end_slope(double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(m) > std::abs(3.0 * d0)) return 3.0 * d0;
    return m;
  }

  [[nodiscard]] std::size_t interval(double s) const {
    auto it = std::upper_bound(t.begin(), t.end(), s);
    std::size_t k = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    return std::min(k, t.size() - 2);
  }

  [[nodiscard]] double value(double s) const {
    const std::size_t k = interval(s);
    if (s == t[k]) return y[k];
    if (s == t[k + 1]) return y[k + 1];
    const double h = t[k + 1] - t[k];
    const double u = (s - t[k]) / h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    return h00 * y[k] + h10 * h * d[k] + h01 * y[k + 1] + h11 * h * d[k + 1];
  }

  [[nodiscard]] double derivative(double s) const {
    const std::size_t k = interval(s);
    const double h = t[k + 1] - t[k];
    const double u = (s - t[k]) / h;
    const double d00 = 6 * u * u - 6 * u, d10 = 3 * u * u - 4 * u + 1;
    const double d01 = -6 * u * u + 6 * u, d11 = 3 * u * u - 2 * u;
    return (d00 * y[k] + d01 * y[k + 1]) / h + d10 * d[k] + d11 * d[k + 1];
  }
};

}  // namespace

struct CoefficientField::Impl {
  Matrix Q0, B0;                       // constant
  std::vector<Expression> q, b, dq;    // closed form, row-major
  std::vector<std::string> q_text, b_text;
  std::vector<Pchip> q_tab, b_tab;     // table, row-major
  std::vector<double> times;
};

CoefficientField::CoefficientField(int n, FieldKind kind, TimeWindow window, std::shared_ptr<const Impl> impl)
    : n_(n), kind_(kind), window_(window), impl_(std::move(impl)) {}

namespace {

void validate_matrix(const Matrix& M, const char* what, double s) {
  if (!M.allFinite()) {
    std::ostringstream os;
    os << what << " has a non-finite entry at s=" << s;
    throw InputError(os.str());
  }
}

void validate_symmetric(const Matrix& Q, double s) {
  validate_matrix(Q, "Q", s);
  const double defect = (Q - Q.transpose()).cwiseAbs().maxCoeff();
  if (defect > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "Q is not symmetric at s=" << s << " (defect " << defect << ")";
    throw ValidationError(os.str());
  }
}

}  // namespace

CoefficientField CoefficientField::constant(const Matrix& Q, const Matrix& B) {
  const auto n = static_cast<int>(Q.rows());
  if (n < 1 || n > kMaxDim || Q.cols() != n || B.rows() != n || B.cols() != n)
    throw InputError("constant field: Q and B must be square matrices of equal size 1..8");
  validate_symmetric(Q, 0.0);
  validate_matrix(B, "B", 0.0);
  auto impl = std::make_shared<Impl>();
  impl->Q0 = Q;
  impl->B0 = B;
  return CoefficientField(n, FieldKind::Constant, unbounded(), impl);
}

CoefficientField CoefficientField::closed_form(int n, const std::vector<std::string>& Q,
                                               const std::vector<std::string>& B, TimeWindow window) {
  if (n < 1 || n > kMaxDim) throw InputError("closed-form field: dimension must be in 1..8");
  const auto nn = static_cast<std::size_t>(n * n);
  if (Q.size() != nn || B.size() != nn) throw InputError("closed-form field: expected N*N entries for Q and B");
  auto impl = std::make_shared<Impl>();
  const auto vars = Expression::time_variables();
  for (std::size_t k = 0; k < nn; ++k) {
    impl->q.push_back(Expression::parse(Q[k], vars));
    impl->b.push_back(Expression::parse(B[k], vars));
    impl->dq.push_back(impl->q.back().derivative(0));
  }
  impl->q_text = Q;
  impl->b_text = B;
  CoefficientField f(n, FieldKind::ClosedForm, window, impl);
  // Symmetry is a structural property of the expressions; check it on a few
  // times so that gross input mistakes surface at load.
  const double lo = std::isfinite(window.lo) ? window.lo : -1.0;
  const double hi = std::isfinite(window.hi) ? window.hi : 1.0;
  for (int k = 0; k < 5; ++k) {
    const double s = lo + (hi - lo) * k / 4.0;
    Matrix Qs, Bs;
    f.eval_unchecked(s, Qs, Bs);
    validate_symmetric(Qs, s);
    validate_matrix(Bs, "B", s);
  }
  return f;
}

CoefficientField CoefficientField::table(const std::vector<double>& times, const std::vector<Matrix>& Q,
                                         const std::vector<Matrix>& B) {
  if (times.size() < 2) throw InputError("table field: at least two nodes are required");
  if (Q.size() != times.size() || B.size() != times.size())
    throw InputError("table field: Q and B must have one matrix per time node");
  if (!std::is_sorted(times.begin(), times.end()) ||
      std::adjacent_find(times.begin(), times.end()) != times.end())
    throw InputError("table field: times must be strictly increasing");
  const auto n = static_cast<int>(Q.front().rows());
  if (n < 1 || n > kMaxDim) throw InputError("table field: dimension must be in 1..8");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (Q[k].rows() != n || Q[k].cols() != n || B[k].rows() != n || B[k].cols() != n)
      throw InputError("table field: inconsistent matrix sizes");
    validate_symmetric(Q[k], times[k]);
    validate_matrix(B[k], "B", times[k]);
  }
  auto impl = std::make_shared<Impl>();
  impl->times = times;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::vector<double> qv, bv;
      for (std::size_t k = 0; k < times.size(); ++k) {
        // Symmetrize at the nodes so the interpolant is exactly symmetric.
        qv.push_back(0.5 * (Q[k](i, j) + Q[k](j, i)));
        bv.push_back(B[k](i, j));
      }
      impl->q_tab.emplace_back(times, qv);
      impl->b_tab.emplace_back(times, bv);
    }
  }
  return CoefficientField(n, FieldKind::Table, {times.front(), times.back()}, impl);
}

void CoefficientField::check_time(double s) const {
  if (!(s >= window_.lo && s <= window_.hi)) {
    std::ostringstream os;
    os.precision(17);
    os << "time s=" << s << " is outside the field window [" << window_.lo << ", " << window_.hi << "]";
    throw RangeError(os.str());
  }
}

void CoefficientField::eval_unchecked(double s, Matrix& Q, Matrix& B) const {
  Q.resize(n_, n_);
  B.resize(n_, n_);
  switch (kind_) {
    case FieldKind::Constant:
      Q = impl_->Q0;
      B = impl_->B0;
      return;
    case FieldKind::ClosedForm:
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
          const auto k = static_cast<std::size_t>(i * n_ + j);
          Q(i, j) = impl_->q[k].at(s);
          B(i, j) = impl_->b[k].at(s);
        }
      return;
    case FieldKind::Table:
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
          const auto k = static_cast<std::size_t>(i * n_ + j);
          Q(i, j) = impl_->q_tab[k].value(s);
          B(i, j) = impl_->b_tab[k].value(s);
        }
      return;
  }
}

Matrix CoefficientField::Q(double s) const {
  check_time(s);
  Matrix Qs, Bs;
  eval_unchecked(s, Qs, Bs);
  return Qs;
}

Matrix CoefficientField::B(double s) const {
  check_time(s);
  Matrix Qs, Bs;
  eval_unchecked(s, Qs, Bs);
  return Bs;
}

Matrix CoefficientField::dQ(double s) const {
  check_time(s);
  Matrix D = Matrix::Zero(n_, n_);
  if (kind_ == FieldKind::ClosedForm) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) D(i, j) = impl_->dq[static_cast<std::size_t>(i * n_ + j)].at(s);
  } else if (kind_ == FieldKind::Table) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) D(i, j) = impl_->q_tab[static_cast<std::size_t>(i * n_ + j)].derivative(s);
  }
  return D;
}

nlohmann::json CoefficientField::describe() const {
  nlohmann::json j;
  j["name"] = name_;
  j["N"] = n_;
  j["kind"] = to_string(kind_);
  if (std::isfinite(window_.lo) || std::isfinite(window_.hi)) j["window"] = {window_.lo, window_.hi};
  return j;
}

Matrix eval_Q(const CoefficientField& field, double s) { return field.Q(s); }
Matrix eval_B(const CoefficientField& field, double s) { return field.B(s); }
Matrix eval_dQ(const CoefficientField& field, double s) { return field.dQ(s); }

namespace {

int spec_dim(const nlohmann::json& spec) {
  if (!spec.contains("N") || !spec["N"].is_number_integer()) throw InputError("coefficient spec: missing integer \"N\"");
  const int n = spec["N"].get<int>();
  if (n < 1 || n > kMaxDim) throw InputError("coefficient spec: N must be in 1..8");
  return n;
}

// Accepts a scalar (N=1 or scalar multiple of I), a flat list of N*N values,
// or a nested row list.
template <class T, class Convert>
std::vector<T> read_entries(const nlohmann::json& v, int n, const char* what, Convert convert, T zero) {
  const auto nn = static_cast<std::size_t>(n * n);
  std::vector<T> out;
  if (v.is_number() || v.is_string()) {
    out.assign(nn, zero);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i * n + i)] = convert(v);
    return out;
  }
  if (!v.is_array()) throw InputError(std::string("coefficient spec: \"") + what + "\" has an invalid shape");
  if (v.size() == nn && !v[0].is_array()) {
    for (const auto& e : v) out.push_back(convert(e));
    return out;
  }
  if (v.size() != static_cast<std::size_t>(n))
    throw InputError(std::string("coefficient spec: \"") + what + "\" must have N rows");
  for (const auto& row : v) {
    if (!row.is_array() || row.size() != static_cast<std::size_t>(n))
      throw InputError(std::string("coefficient spec: each row of \"") + what + "\" must have N entries");
    for (const auto& e : row) out.push_back(convert(e));
  }
  return out;
}

double to_number(const nlohmann::json& e) {
  if (!e.is_number()) throw InputError("coefficient spec: expected a number");
  return e.get<double>();
}

std::string to_expr(const nlohmann::json& e) {
  if (e.is_string()) return e.get<std::string>();
  if (e.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << e.get<double>();
    return os.str();
  }
  throw InputError("coefficient spec: expected an expression string or a number");
}

Matrix to_matrix(const std::vector<double>& v, int n) {
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = v[static_cast<std::size_t>(i * n + j)];
  return M;
}

}  // namespace

CoefficientField CoefficientField::from_json(const nlohmann::json& spec) {
  if (!spec.is_object()) throw InputError("coefficient spec must be a JSON object");
  const int n = spec_dim(spec);
  const std::string kind = spec.value("kind", std::string("constant"));
  if (!spec.contains("Q") || !spec.contains("B")) throw InputError("coefficient spec: \"Q\" and \"B\" are required");
  CoefficientField field = [&]() {
    if (kind == "constant") {
      return constant(to_matrix(read_entries<double>(spec["Q"], n, "Q", to_number, 0.0), n),
                      to_matrix(read_entries<double>(spec["B"], n, "B", to_number, 0.0), n));
    }
    if (kind == "closedform") {
      TimeWindow w = unbounded();
      if (spec.contains("window")) w = {spec["window"].at(0).get<double>(), spec["window"].at(1).get<double>()};
      return closed_form(n, read_entries<std::string>(spec["Q"], n, "Q", to_expr, std::string("0")),
                         read_entries<std::string>(spec["B"], n, "B", to_expr, std::string("0")), w);
    }
    if (kind == "table") {
      if (!spec.contains("times")) throw InputError("table spec: \"times\" is required");
      const auto times = spec["times"].get<std::vector<double>>();
      std::vector<Matrix> Q, B;
      if (!spec["Q"].is_array() || !spec["B"].is_array())
        throw InputError("table spec: \"Q\" and \"B\" must be arrays of matrices");
      for (const auto& m : spec["Q"]) Q.push_back(to_matrix(read_entries<double>(m, n, "Q", to_number, 0.0), n));
      for (const auto& m : spec["B"]) B.push_back(to_matrix(read_entries<double>(m, n, "B", to_number, 0.0), n));
      return table(times, Q, B);
    }
    throw InputError("coefficient spec: unknown kind \"" + kind + "\"");
  }();
  field.set_name(spec.value("name", std::string()));
  return field;
}

namespace fixtures {

CoefficientField benchmark() {
  return CoefficientField::constant(Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 1.0)).set_name("benchmark");
}

CoefficientField isotropic2() {
  return CoefficientField::constant(2.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2)).set_name("iso2");
}

CoefficientField noncommuting() {
  return CoefficientField::closed_form(2, {"2", "0", "0", "2"}, {"2", "sin(s)", "0", "2"}).set_name("noncommuting");
}

CoefficientField autonomous_nonnormal() {
  Matrix Q(2, 2), B(2, 2);
  Q << 1.0, 0.3, 0.3, 2.0;
  B << 2.0, 1.0, 0.0, 1.0;
  return CoefficientField::constant(Q, B).set_name("nonnormal");
}

CoefficientField by_name(const std::string& name) {
  if (name == "benchmark") return benchmark();
  if (name == "iso2") return isotropic2();
  if (name == "noncommuting") return noncommuting();
  if (name == "nonnormal") return autonomous_nonnormal();
  throw InputError("unknown fixture field \"" + name + "\"");
}

}  // namespace fixtures

}  // namespace oulab
