#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace oulab {

/// Largest spatial dimension handled by the lab. Matrices are stack
/// allocated with this capacity, so small-N kernels never touch the heap.
inline constexpr int kMaxDim = 8;

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

/// Scalar function of a spatial point.
using SpatialFunction = std::function<double(const Vector&)>;

/// Scalar function of a space-time point (s, x).
using SpaceTimeFunction = std::function<double(double, const Vector&)>;

/// Closed time interval [lo, hi].
struct TimeWindow {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] double length() const { return hi - lo; }
  [[nodiscard]] bool contains(double s) const { return s >= lo && s <= hi; }
};

/// Axis-aligned box in R^N.
struct Box {
  Vector lo;
  Vector hi;

  [[nodiscard]] int dim() const { return static_cast<int>(lo.size()); }
  [[nodiscard]] double volume() const { return (hi - lo).prod(); }

  static Box cube(int n, double lo, double hi) {
    Box b;
    b.lo = Vector::Constant(n, lo);
    b.hi = Vector::Constant(n, hi);
    return b;
  }
};

}  // namespace oulab
