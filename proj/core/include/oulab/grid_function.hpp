#pragma once

#include "oulab/types.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace oulab {

/// Uniform space-time grid: nt time nodes on [window.lo, window.hi] and a
/// tensor grid with nx[i] nodes per axis on the box (endpoints included).
struct GridSpec {
  TimeWindow window;
  int nt = 1;
  Box box;
  std::vector<int> nx;

  /// Grid with steps as close as possible to (tau, h) that hit the endpoints.
  static GridSpec uniform(TimeWindow window, double tau, const Box& box, double h);
  /// Single time slice at time s.
  static GridSpec slice(double s, const Box& box, double h);

  [[nodiscard]] int dim() const { return static_cast<int>(nx.size()); }
  [[nodiscard]] double tau() const { return nt > 1 ? window.length() / (nt - 1) : 0.0; }
  [[nodiscard]] double h(int axis) const;
  [[nodiscard]] double time(int k) const { return nt > 1 ? window.lo + window.length() * k / (nt - 1) : window.lo; }
  [[nodiscard]] std::size_t slice_size() const;
  [[nodiscard]] std::size_t size() const { return slice_size() * static_cast<std::size_t>(nt); }
  /// Coordinates of a flat spatial index (axis 0 fastest).
  [[nodiscard]] Vector point(std::size_t flat) const;
  void multi_index(std::size_t flat, int* idx) const;
  [[nodiscard]] std::size_t flat_index(const int* idx) const;
  [[nodiscard]] std::size_t stride(int axis) const;
  /// Spatial volume element prod h_i.
  [[nodiscard]] double cell_volume() const;
  void validate() const;
};

/// Scalar samples on a GridSpec, plus a per-slice retained flag (slices
/// dropped by a time shift are flagged, never zero-filled).
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(GridSpec spec, double fill = 0.0);

  static GridFunction sample(const GridSpec& spec, const SpaceTimeFunction& f);

  [[nodiscard]] const GridSpec& spec() const { return spec_; }
  [[nodiscard]] std::span<double> slice(int k);
  [[nodiscard]] std::span<const double> slice(int k) const;
  [[nodiscard]] double& at(int k, std::size_t flat) { return values_[index(k, flat)]; }
  [[nodiscard]] double at(int k, std::size_t flat) const { return values_[index(k, flat)]; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] std::vector<double>& values() { return values_; }

  [[nodiscard]] bool retained(int k) const { return retained_[static_cast<std::size_t>(k)] != 0; }
  void set_retained(int k, bool r) { retained_[static_cast<std::size_t>(k)] = r ? 1 : 0; }
  [[nodiscard]] int retained_count() const;

  /// Tensor Lagrange interpolation of slice k at x (degree 3 by default,
  /// degree 1 keeps nonnegative data nonnegative). Points outside the box are
  /// clamped to it.
  [[nodiscard]] double interpolate(int k, const Vector& x, int degree = 3) const;
  [[nodiscard]] SpatialFunction slice_function(int k, int degree = 3) const;

  [[nodiscard]] double max_abs() const;
  [[nodiscard]] bool all_finite() const;

  /// CSV rows (s, x1..xN, value) over retained slices, 17 significant digits.
  void write_csv(std::ostream& os) const;
  /// Binary layout, little-endian:
  ///   magic "OUGF", u32 version=1, u32 N, u32 nt, u32 nx[N],
  ///   f64 window.lo, window.hi, box.lo[N], box.hi[N], u8 retained[nt],
  ///   f64 values[nt * prod nx] (axis 0 fastest, time slowest).
  void write_binary(std::ostream& os) const;
  static GridFunction read_binary(std::istream& is);

 private:
  [[nodiscard]] std::size_t index(int k, std::size_t flat) const {
    return static_cast<std::size_t>(k) * slice_size_ + flat;
  }
  GridSpec spec_;
  std::size_t slice_size_ = 0;
  std::vector<double> values_;
  std::vector<unsigned char> retained_;
};

}  // namespace oulab
