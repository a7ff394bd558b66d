#include "oulab/coefficient_field.hpp"
#include "oulab/errors.hpp"
#include "oulab/expression.hpp"
#include "oulab/fundamental_solution.hpp"
#include "oulab/hypotheses.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace oulab;

namespace {

Matrix m1(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST(Expression, EvaluatesAndDifferentiates) {
  const auto e = Expression::parse("2 + sin(s) * x1^2", Expression::space_time_variables(1));
  Vector x(1);
  x << 3.0;
  EXPECT_NEAR(e.at(0.5, x), 2.0 + std::sin(0.5) * 9.0, 1e-14);
  EXPECT_NEAR(e.derivative(1).at(0.5, x), 6.0 * std::sin(0.5), 1e-14);
  EXPECT_NEAR(e.derivative(0).at(0.5, x), 9.0 * std::cos(0.5), 1e-14);
}

TEST(Expression, RejectsGarbage) {
  EXPECT_THROW(Expression::parse("2 + ", Expression::time_variables()), Error);
  EXPECT_THROW(Expression::parse("y", Expression::time_variables()), Error);
}

TEST(CoefficientField, ConstantEvaluation) {
  const auto f = CoefficientField::constant(2.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  EXPECT_TRUE(f.Q(3.7).isApprox(2.0 * Matrix::Identity(2, 2)));
  EXPECT_EQ(f.dQ(1.0).norm(), 0.0);
}

TEST(CoefficientField, ClosedFormEvaluation) {
  const auto f = CoefficientField::closed_form(1, {"2"}, {"2 + sin(s)"});
  EXPECT_DOUBLE_EQ(f.B(0.0)(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(f.B(std::acos(0.0))(0, 0), 3.0);
}

TEST(CoefficientField, ClosedFormDerivativeMatchesDifferences) {
  const auto f = CoefficientField::closed_form(1, {"2 + cos(s)"}, {"1"});
  const double s = 0.7, h = 1e-4;
  const double fd = (f.Q(s + h)(0, 0) - f.Q(s - h)(0, 0)) / (2 * h);
  EXPECT_NEAR(f.dQ(s)(0, 0), fd, 1e-7);
}

TEST(CoefficientField, TableReproducesNodes) {
  const std::vector<double> t{0.0, 1.0, 2.0, 3.0};
  const std::vector<Matrix> Q{m1(2.0), m1(2.5), m1(3.0), m1(2.0)};
  const std::vector<Matrix> B{m1(1.0), m1(1.0), m1(1.5), m1(1.0)};
  const auto f = CoefficientField::table(t, Q, B);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(f.Q(t[i])(0, 0), Q[i](0, 0));
    EXPECT_EQ(f.B(t[i])(0, 0), B[i](0, 0));
  }
  EXPECT_THROW((void)f.Q(3.5), Error);
}

TEST(CoefficientField, RejectsAsymmetricQ) {
  Matrix Q(2, 2);
  Q << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(CoefficientField::constant(Q, Matrix::Identity(2, 2)), Error);
}

TEST(CoefficientField, FromJson) {
  const auto f = CoefficientField::from_json(
      nlohmann::json::parse(R"js({"N": 2, "kind": "closedform", "Q": [["2","0"],["0","2"]],
                                 "B": [["2","sin(s)"],["0","2"]], "name": "nc"})js"));
  EXPECT_EQ(f.dim(), 2);
  EXPECT_EQ(f.name(), "nc");
  EXPECT_NEAR(f.B(1.0)(0, 1), std::sin(1.0), 1e-15);
  EXPECT_THROW(CoefficientField::from_json(nlohmann::json::parse(R"js({"N": 1, "Q": [2]})js")), Error);
}

TEST(Hypotheses, StableBenchmarkPasses) {
  const auto rep = check_hypotheses(fixtures::benchmark(), {0.0, 5.0}, 21);
  EXPECT_NEAR(rep.eta0_hat, 2.0, 1e-12);
  EXPECT_NEAR(rep.omega_hat, 1.0, 1e-6);
  EXPECT_NEAR(rep.C0_hat, 1.0, 1e-6);
  EXPECT_TRUE(rep.all_pass());
}

TEST(Hypotheses, GrowingFieldFailsStability) {
  const auto f = CoefficientField::constant(m1(2.0), m1(-1.0));
  const auto rep = check_hypotheses(f, {0.0, 5.0}, 21);
  EXPECT_FALSE(rep.pass_iii);
}

TEST(Hypotheses, NeutralFieldFailsStability) {
  const auto f = CoefficientField::constant(Matrix::Identity(2, 2), Matrix::Zero(2, 2));
  const auto rep = check_hypotheses(f, {0.0, 5.0}, 21);
  EXPECT_FALSE(rep.pass_iii);
  EXPECT_NEAR(rep.eta0_hat, 1.0, 1e-12);
}
