#pragma once

#include "oulab/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace oulab {

/// Closed-form scalar function of (s, x) with analytic first and second
/// spatial derivatives and time derivative. Spatial-only members ignore s.
class TestFunction {
 public:
  virtual ~TestFunction() = default;

  [[nodiscard]] virtual int dim() const = 0;
  [[nodiscard]] virtual double value(double s, const Vector& x) const = 0;
  [[nodiscard]] virtual Vector grad(double s, const Vector& x) const = 0;
  [[nodiscard]] virtual Matrix hess(double s, const Vector& x) const = 0;
  [[nodiscard]] virtual double ds(double s, const Vector& x) const = 0;

  /// Limit as |x| -> infinity when it exists.
  [[nodiscard]] virtual std::optional<double> far_field() const { return std::nullopt; }
  /// Lower bound of the function, when known in closed form.
  [[nodiscard]] virtual std::optional<double> lower_bound() const { return std::nullopt; }
  [[nodiscard]] virtual std::string family() const = 0;
  [[nodiscard]] virtual nlohmann::ordered_json params() const = 0;

  [[nodiscard]] double laplacian(double s, const Vector& x) const { return hess(s, x).trace(); }
  [[nodiscard]] SpatialFunction slice(double s) const;
  [[nodiscard]] SpaceTimeFunction function() const;
  /// {"family": ..., "params": ...}
  [[nodiscard]] nlohmann::ordered_json describe() const;
};

using TestFunctionPtr = std::shared_ptr<const TestFunction>;

TestFunctionPtr make_constant(int n, double c);
/// <v, x> + c.
TestFunctionPtr make_linear(const Vector& v, double c = 0.0);
/// q(x_1 - c_1) exp(-a |x - c|^2 - b (s - d)^2), q a polynomial given by its
/// coefficients in increasing degree. a = b = 0 gives a plain polynomial in x_1.
TestFunctionPtr make_poly_gaussian(std::vector<double> poly, double a, const Vector& center, double b = 0.0,
                                   double d = 0.0);
/// exp(-a |x - c|^2 - b (s - d)^2).
TestFunctionPtr make_gaussian_bump(double a, const Vector& center, double b = 0.0, double d = 0.0);
/// He_k(sqrt(2a)(x_1 - c_1)) exp(-a |x - c|^2 - b (s - d)^2) with the probabilists' Hermite polynomial.
TestFunctionPtr make_hermite_gaussian(int k, double a, const Vector& center, double b = 0.0, double d = 0.0);
/// exp(-1 / (1 - q)) for q = |x - c|^2 / R^2 + (s - d)^2 / T^2 < 1, else 0.
/// T = infinity gives a spatial bump.
TestFunctionPtr make_smooth_bump(const Vector& center, double radius, double d = 0.0,
                                 double half_width = std::numeric_limits<double>::infinity());
/// v(s, x) = u(lambda^2 s, lambda x).
TestFunctionPtr make_rescaled(TestFunctionPtr u, double lambda);
/// c * u.
TestFunctionPtr make_scaled(TestFunctionPtr u, double c);

struct CorpusMember {
  std::string id;
  TestFunctionPtr fn;
};
using Corpus = std::vector<CorpusMember>;

/// Space-time Gaussian bumps exp(-a|x-c|^2 - b(s-d)^2) with parameters drawn
/// uniformly from the given ranges (c per coordinate, d around d_mid).
struct BumpCorpusRanges {
  double a_lo = 1.5, a_hi = 3.0;
  double b_lo = 1.5, b_hi = 3.0;
  double c_lo = -1.0, c_hi = 1.0;
  double d_mid = 5.0, d_spread = 0.5;
};
Corpus bump_corpus(int n, int count, std::uint64_t seed, const BumpCorpusRanges& ranges = {});

/// Spatial corpus for the kernel checks: Gaussian bumps, Hermite-Gaussian
/// products and shifted bumps with moderate widths. Every member has a far
/// field limit of 0. With nonnegative_only, Hermite members are omitted.
Corpus kernel_corpus(int n, int count, std::uint64_t seed, bool nonnegative_only = false);

}  // namespace oulab
