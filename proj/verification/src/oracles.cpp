#include "oulab/verification/oracles.hpp"

#include <Eigen/LU>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace oulab::oracle {

std::optional<Matrix> fundamental(const std::string& fixture, double t, double s) {
  if (fixture == "benchmark") {
    Matrix U(1, 1);
    U(0, 0) = std::exp(t - s);
    return U;
  }
  if (fixture == "iso2") return Matrix(std::exp(t - s) * Matrix::Identity(2, 2));
  if (fixture == "noncommuting") {
    // B = 2I + N(s) with N(s) N(t) = 0
    Matrix U(2, 2);
    U << 1.0, std::cos(s) - std::cos(t), 0.0, 1.0;
    return Matrix(std::exp(2.0 * (t - s)) * U);
  }
  if (fixture == "nonnormal") {
    Eigen::Matrix2d B;
    B << 2.0, 1.0, 0.0, 1.0;
    const Eigen::Matrix2d E = (B * (t - s)).exp();
    return Matrix(E);
  }
  return std::nullopt;
}

Matrix lyapunov(const Matrix& B, const Matrix& Q) {
  const int n = static_cast<int>(B.rows());
  const Eigen::MatrixXd Bd = B, Qd = Q;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  // vec(B X + X B^T) = (I (x) B + B (x) I) vec(X)
  const Eigen::MatrixXd K = Eigen::kroneckerProduct(I, Bd) + Eigen::kroneckerProduct(Bd, I);
  const Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(Qd.data(), n * n);
  const Eigen::VectorXd x = K.fullPivLu().solve(q);
  Eigen::MatrixXd X = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
  return Matrix(0.5 * (X + X.transpose()));
}

double benchmark_sigma(double t) { return -std::expm1(-2.0 * t); }
double benchmark_mean(double t) { return std::exp(-t); }

double gaussian_bump_expectation(double a, const Vector& c, const Vector& m, const Matrix& S) {
  const int n = static_cast<int>(c.size());
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) + 2.0 * a * Eigen::MatrixXd(S);
  const Eigen::VectorXd d = Eigen::VectorXd(m) - Eigen::VectorXd(c);
  const auto lu = A.partialPivLu();
  return std::exp(-a * d.dot(lu.solve(d))) / std::sqrt(lu.determinant());
}

double benchmark_FO(double p, double x) { return (2.0 / p - 1.0) * x; }
double benchmark_VO(double p, double x) { return (p - 1.0) / (p * p) * x * x - 1.0 / p; }

}  // namespace oulab::oracle
