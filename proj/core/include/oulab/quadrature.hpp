#pragma once

#include <vector>

namespace oulab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for the weight exp(-z^2) (Golub-Welsch). Cached per n.
const QuadratureRule& gauss_hermite(int n);

/// Gauss-Legendre rule on [-1, 1] (Golub-Welsch). Cached per n.
const QuadratureRule& gauss_legendre(int n);

/// Composite Gauss-Legendre on [a,b] with panels no wider than max_panel.
template <class F>
double composite_legendre(F&& f, double a, double b, int order = 8, double max_panel = 0.25) {
  if (b == a) return 0.0;
  const auto& rule = gauss_legendre(order);
  int panels = static_cast<int>((b - a) / max_panel);
  if (panels * max_panel < b - a) ++panels;
  panels = panels < 1 ? 1 : panels;
  const double w = (b - a) / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = a + (k + 0.5) * w;
    double part = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) part += rule.weights[i] * f(mid + 0.5 * w * rule.nodes[i]);
    total += 0.5 * w * part;
  }
  return total;
}

}  // namespace oulab
