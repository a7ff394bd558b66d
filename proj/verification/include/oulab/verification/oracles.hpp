#pragma once

// Reference values computed without the library's integrators or
// quadratures: closed forms, a dense Lyapunov solve and Gaussian integrals.

#include "oulab/types.hpp"

#include <optional>
#include <string>

namespace oulab::oracle {

/// U(t,s) in closed form for the fixtures:
///   benchmark     e^{t-s}
///   iso2          e^{t-s} I
///   noncommuting  e^{2(t-s)} [[1, cos s - cos t], [0, 1]]
///   nonnormal     expm(B (t-s)) by Eigen's matrix exponential
std::optional<Matrix> fundamental(const std::string& fixture, double t, double s);

/// X with B X + X B^T = Q, by the vectorized (Kronecker) linear system.
Matrix lyapunov(const Matrix& B, const Matrix& Q);

/// Benchmark kernel over a gap t = s - r: Sigma = 1 - e^{-2t}, E = e^{-t}.
double benchmark_sigma(double t);
double benchmark_mean(double t);

/// int exp(-a |y - c|^2) N(m, S)(dy) = det(I + 2aS)^{-1/2} exp(-a (m-c)^T (I + 2aS)^{-1} (m-c)).
double gaussian_bump_expectation(double a, const Vector& c, const Vector& m, const Matrix& S);

/// Benchmark (Q = 2, B = 1, Q_s = 1): F_O = (2/p - 1) x, V_O = (p-1)/p^2 x^2 - 1/p.
double benchmark_FO(double p, double x);
double benchmark_VO(double p, double x);

/// Hand-computed smallness values: p = 2, theta = 2/3 with
/// (beta, gamma, kappa, M) = (0, 0.1, 1, 1) -> 463/1200 and (4, 0, 0, 1) -> 7/3.
inline constexpr double kSmallnessPass = 463.0 / 1200.0;
inline constexpr double kSmallnessFail = 7.0 / 3.0;

/// Exact overlap integers: (0.5, 1, 1) -> 45^3 and (0.25, 1, 1) -> floor((145/9)^3).
inline constexpr long long kXiHalf = 91125, kZetaHalf = 182252;
inline constexpr long long kXiQuarter = 4181, kZetaQuarter = 8364;

}  // namespace oulab::oracle
