#include "oulab/grid_function.hpp"

#include "oulab/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace oulab {

namespace {

int nodes_for(double length, double step) {
  if (length <= 0.0) return 1;
  return std::max(2, static_cast<int>(std::lround(length / step)) + 1);
}

}  // namespace

GridSpec GridSpec::uniform(TimeWindow window, double tau, const Box& box, double h) {
  if (!(tau > 0.0) || !(h > 0.0)) throw ArgumentError("grid steps must be positive");
  GridSpec g;
  g.window = window;
  g.nt = nodes_for(window.length(), tau);
  g.box = box;
  for (int i = 0; i < box.dim(); ++i) g.nx.push_back(nodes_for(box.hi[i] - box.lo[i], h));
  g.validate();
  return g;
}

GridSpec GridSpec::slice(double s, const Box& box, double h) {
  GridSpec g = uniform({s, s}, 1.0, box, h);
  g.nt = 1;
  return g;
}

double GridSpec::h(int axis) const {
  const auto a = static_cast<std::size_t>(axis);
  return nx[a] > 1 ? (box.hi[axis] - box.lo[axis]) / (nx[a] - 1) : 0.0;
}

std::size_t GridSpec::slice_size() const {
  std::size_t n = 1;
  for (int v : nx) n *= static_cast<std::size_t>(v);
  return n;
}

std::size_t GridSpec::stride(int axis) const {
  std::size_t s = 1;
  for (int i = 0; i < axis; ++i) s *= static_cast<std::size_t>(nx[static_cast<std::size_t>(i)]);
  return s;
}

void GridSpec::multi_index(std::size_t flat, int* idx) const {
  for (std::size_t i = 0; i < nx.size(); ++i) {
    const auto n = static_cast<std::size_t>(nx[i]);
    idx[i] = static_cast<int>(flat % n);
    flat /= n;
  }
}

std::size_t GridSpec::flat_index(const int* idx) const {
  std::size_t flat = 0;
  for (std::size_t i = nx.size(); i-- > 0;) flat = flat * static_cast<std::size_t>(nx[i]) + static_cast<std::size_t>(idx[i]);
  return flat;
}

Vector GridSpec::point(std::size_t flat) const {
  Vector x(dim());
  for (int i = 0; i < dim(); ++i) {
    const auto n = static_cast<std::size_t>(nx[static_cast<std::size_t>(i)]);
    const auto k = static_cast<double>(flat % n);
    flat /= n;
    x[i] = box.lo[i] + k * h(i);
  }
  return x;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= h(i);
  return v;
}

void GridSpec::validate() const {
  if (nt < 1) throw ArgumentError("grid: at least one time node is required");
  if (nx.empty() || static_cast<int>(nx.size()) > kMaxDim) throw ArgumentError("grid: dimension must be in 1..8");
  if (box.dim() != dim()) throw ArgumentError("grid: box and node counts disagree in dimension");
  for (int i = 0; i < dim(); ++i) {
    if (nx[static_cast<std::size_t>(i)] < 1) throw ArgumentError("grid: node counts must be positive");
    if (!(box.hi[i] >= box.lo[i])) throw ArgumentError("grid: box must have lo <= hi");
  }
  if (!(window.hi >= window.lo)) throw ArgumentError("grid: window must have lo <= hi");
}

GridFunction::GridFunction(GridSpec spec, double fill) : spec_(std::move(spec)) {
  spec_.validate();
  slice_size_ = spec_.slice_size();
  values_.assign(spec_.size(), fill);
  retained_.assign(static_cast<std::size_t>(spec_.nt), 1);
}

GridFunction GridFunction::sample(const GridSpec& spec, const SpaceTimeFunction& f) {
  GridFunction g(spec);
  for (int k = 0; k < spec.nt; ++k) {
    const double s = spec.time(k);
    for (std::size_t j = 0; j < g.slice_size_; ++j) g.at(k, j) = f(s, spec.point(j));
  }
  return g;
}

std::span<double> GridFunction::slice(int k) {
  return {values_.data() + index(k, 0), slice_size_};
}

std::span<const double> GridFunction::slice(int k) const {
  return {values_.data() + index(k, 0), slice_size_};
}

int GridFunction::retained_count() const {
  return static_cast<int>(std::count(retained_.begin(), retained_.end(), 1));
}

double GridFunction::interpolate(int k, const Vector& x, int degree) const {
  if (degree != 1 && degree != 3) throw ArgumentError("grid: interpolation degree must be 1 or 3");
  const int n = spec_.dim();
  int base[kMaxDim];
  int cnt[kMaxDim];
  double w[kMaxDim][4];
  for (int i = 0; i < n; ++i) {
    const int m = spec_.nx[static_cast<std::size_t>(i)];
    const double h = spec_.h(i);
    if (m == 1) {
      base[i] = 0;
      cnt[i] = 1;
      w[i][0] = 1.0;
      continue;
    }
    const double xi = std::clamp(x[i], spec_.box.lo[i], spec_.box.hi[i]);
    const double t = (xi - spec_.box.lo[i]) / h;
    const int order = std::min(degree + 1, m);
    int b = static_cast<int>(std::floor(t)) - (order == 4 ? 1 : 0);
    b = std::clamp(b, 0, m - order);
    base[i] = b;
    cnt[i] = order;
    for (int a = 0; a < order; ++a) {
      double l = 1.0;
      for (int c = 0; c < order; ++c)
        if (c != a) l *= (t - (b + c)) / static_cast<double>(a - c);
      w[i][a] = l;
    }
  }
  int off[kMaxDim] = {0};
  int idx[kMaxDim];
  double total = 0.0;
  for (;;) {
    double weight = 1.0;
    for (int i = 0; i < n; ++i) {
      idx[i] = base[i] + off[i];
      weight *= w[i][off[i]];
    }
    total += weight * at(k, spec_.flat_index(idx));
    int i = 0;
    while (i < n && ++off[i] == cnt[i]) off[i++] = 0;
    if (i == n) break;
  }
  return total;
}

SpatialFunction GridFunction::slice_function(int k, int degree) const {
  return [this, k, degree](const Vector& x) { return interpolate(k, x, degree); };
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool GridFunction::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void GridFunction::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  os << 's';
  for (int i = 1; i <= spec_.dim(); ++i) os << ",x" << i;
  os << ",value\n";
  for (int k = 0; k < spec_.nt; ++k) {
    if (!retained(k)) continue;
    const double s = spec_.time(k);
    for (std::size_t j = 0; j < slice_size_; ++j) {
      os << s;
      const Vector x = spec_.point(j);
      for (int i = 0; i < x.size(); ++i) os << ',' << x[i];
      os << ',' << at(k, j) << '\n';
    }
  }
  os.precision(old);
}

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw InputError("grid function: truncated binary input");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

constexpr char kMagic[4] = {'O', 'U', 'G', 'F'};

}  // namespace

void GridFunction::write_binary(std::ostream& os) const {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(spec_.dim()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(spec_.nt));
  for (int v : spec_.nx) put<std::uint32_t>(os, static_cast<std::uint32_t>(v));
  put<double>(os, spec_.window.lo);
  put<double>(os, spec_.window.hi);
  for (int i = 0; i < spec_.dim(); ++i) put<double>(os, spec_.box.lo[i]);
  for (int i = 0; i < spec_.dim(); ++i) put<double>(os, spec_.box.hi[i]);
  for (unsigned char r : retained_) put<std::uint8_t>(os, r);
  for (double v : values_) put<double>(os, v);
}

GridFunction GridFunction::read_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw InputError("grid function: bad magic");
  if (get<std::uint32_t>(is) != 1) throw InputError("grid function: unsupported version");
  const auto n = static_cast<int>(get<std::uint32_t>(is));
  if (n < 1 || n > kMaxDim) throw InputError("grid function: invalid dimension");
  GridSpec spec;
  spec.nt = static_cast<int>(get<std::uint32_t>(is));
  for (int i = 0; i < n; ++i) spec.nx.push_back(static_cast<int>(get<std::uint32_t>(is)));
  spec.window.lo = get<double>(is);
  spec.window.hi = get<double>(is);
  spec.box.lo.resize(n);
  spec.box.hi.resize(n);
  for (int i = 0; i < n; ++i) spec.box.lo[i] = get<double>(is);
  for (int i = 0; i < n; ++i) spec.box.hi[i] = get<double>(is);
  GridFunction g(spec);
  for (auto& r : g.retained_) r = get<std::uint8_t>(is);
  for (auto& v : g.values_) v = get<double>(is);
  return g;
}

}  // namespace oulab
