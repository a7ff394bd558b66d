#include "oulab/quadrature.hpp"

#include "oulab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace oulab {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix, weights
// mu0 times the squared first components of the eigenvectors.
QuadratureRule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
  const auto n = offdiag.size() + 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = offdiag[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  QuadratureRule rule;
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return eig.eigenvalues()[static_cast<Eigen::Index>(a)] <
                                                       eig.eigenvalues()[static_cast<Eigen::Index>(b)]; });
  for (std::size_t k : order) {
    const auto i = static_cast<Eigen::Index>(k);
    rule.nodes.push_back(eig.eigenvalues()[i]);
    const double v = eig.eigenvectors()(0, i);
    rule.weights.push_back(mu0 * v * v);
  }
  // Symmetric rules: enforce exact symmetry of nodes and weights.
  for (std::size_t i = 0, j = rule.nodes.size() - 1; i < j; ++i, --j) {
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (rule.nodes.size() % 2 == 1) rule.nodes[rule.nodes.size() / 2] = 0.0;
  return rule;
}

template <class Build>
const QuadratureRule& cached(std::map<int, QuadratureRule>& store, std::mutex& m, int n, Build build) {
  if (n < 1 || n > 200) throw ArgumentError("quadrature order must be in 1..200");
  std::lock_guard lock(m);
  auto it = store.find(n);
  if (it == store.end()) it = store.emplace(n, build(n)).first;
  return it->second;
}

}  // namespace

const QuadratureRule& gauss_hermite(int n) {
  static std::map<int, QuadratureRule> store;
  static std::mutex m;
  return cached(store, m, n, [](int k) {
    if (k == 1) return QuadratureRule{{0.0}, {std::sqrt(M_PI)}};
    Eigen::VectorXd off(k - 1);
    for (int i = 1; i < k; ++i) off[i - 1] = std::sqrt(i / 2.0);
    return golub_welsch(off, std::sqrt(M_PI));
  });
}

const QuadratureRule& gauss_legendre(int n) {
  static std::map<int, QuadratureRule> store;
  static std::mutex m;
  return cached(store, m, n, [](int k) {
    if (k == 1) return QuadratureRule{{0.0}, {2.0}};
    Eigen::VectorXd off(k - 1);
    for (int i = 1; i < k; ++i) off[i - 1] = i / std::sqrt(4.0 * i * i - 1.0);
    return golub_welsch(off, 2.0);
  });
}

}  // namespace oulab
