#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "pdrci/lpv_model.hpp"

using namespace pdrci;
using namespace fixtures;

namespace {

LpvData scalar_data(const HPolytope& p, const HPolytope& r) {
  std::vector<MatrixXd> a{MatrixXd::Constant(1, 1, 0.5), MatrixXd::Constant(1, 1, 1.5)};
  std::vector<MatrixXd> b{MatrixXd::Constant(1, 1, 1.0), MatrixXd::Constant(1, 1, 2.0)};
  const HPolytope unit = HPolytope::symmetric_box(VectorXd::Ones(1));
  return LpvData{LpvSystem(a, b), unit, unit, HPolytope::symmetric_box(VectorXd::Constant(1, 0.1)), p, r};
}

}  // namespace

TEST(EvaluateMatrices, ExampleOneMatchesZetaForm) {
  const LpvProblem& prob = example1().cfg.problem;
  for (double zeta : {-0.25, -0.1, 0.0, 0.2, 0.25}) {
    const auto [a, b] = evaluate_matrices(prob.sys(), zeta_param(zeta));
    Eigen::Matrix2d a_ref;
    a_ref << 1 + zeta, 1 + zeta, 0, 1 + zeta;
    EXPECT_LE((a - a_ref).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(b(0, 0), 0.0, 1e-14);
    EXPECT_NEAR(b(1, 0), 1 + zeta, 1e-14);
  }
}

TEST(EvaluateMatrices, IsLinearInParameter) {
  const LpvProblem& prob = example1().cfg.problem;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2d p(g(rng), g(rng)), q(g(rng), g(rng));
    const double s = g(rng);
    const auto [ap, bp] = evaluate_matrices(prob.sys(), p);
    const auto [aq, bq] = evaluate_matrices(prob.sys(), q);
    const auto [a, b] = evaluate_matrices(prob.sys(), p + s * q);
    EXPECT_LE((a - ap - s * aq).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((b - bp - s * bq).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(LpvProblem, RejectsInvalidModels) {
  const HPolytope unit = HPolytope::symmetric_box(VectorXd::Ones(2));
  LpvData neg = scalar_data(unit, HPolytope::symmetric_box(VectorXd::Constant(2, 0.1)));
  EXPECT_THROW(LpvProblem{neg}, Error);
  LpvData no_zero =
      scalar_data(HPolytope::box(VectorXd::Zero(2), VectorXd::Ones(2)),
                  HPolytope::box(VectorXd::Constant(2, 0.1), VectorXd::Constant(2, 0.2)));
  EXPECT_THROW(LpvProblem{no_zero}, Error);
  EXPECT_THROW(LpvSystem({MatrixXd::Identity(2, 2)}, {MatrixXd::Ones(3, 1)}), Error);
}

TEST(LiftNonnegative, ShiftsSymmetricInterval) {
  std::vector<MatrixXd> a{MatrixXd::Constant(1, 1, 0.3)}, b{MatrixXd::Constant(1, 1, 2.0)};
  const HPolytope unit = HPolytope::symmetric_box(VectorXd::Ones(1));
  LpvData data{LpvSystem(a, b), unit, unit, HPolytope::symmetric_box(VectorXd::Constant(1, 0.1)), unit,
               HPolytope::symmetric_box(VectorXd::Constant(1, 0.5))};
  const LiftedProblem lifted = lift_nonnegative(data);
  ASSERT_EQ(lifted.shift.size(), 1);
  EXPECT_NEAR(lifted.shift(0), 1.0, 1e-9);
  EXPECT_EQ(lifted.problem.sys().s(), 2);
  for (double ph : {-1.0, -0.3, 0.0, 0.8, 1.0}) {
    const VectorXd p = lift_parameter(VectorXd::Constant(1, ph), lifted.shift);
    EXPECT_TRUE(contains(lifted.problem.P(), p));
    EXPECT_GE(p.minCoeff(), -1e-12);
    const auto [al, bl] = evaluate_matrices(lifted.problem.sys(), p);
    EXPECT_NEAR(al(0, 0), 0.3 * ph, 1e-12);
    EXPECT_NEAR(bl(0, 0), 2.0 * ph, 1e-12);
  }
  // The constant coordinate cannot vary.
  EXPECT_FALSE(contains(lifted.problem.R(), Eigen::Vector2d(0.01, 0.0)));
  EXPECT_TRUE(contains(lifted.problem.R(), Eigen::Vector2d(0.0, 0.5)));
}

TEST(BuildPplus, StacksBlocks) {
  const LpvProblem& prob = example1().cfg.problem;
  const PPlusData pp = build_pplus(prob.P(), prob.R());
  const int mp = prob.P().rows(), md = prob.R().rows();
  ASSERT_EQ(pp.H_pdelta.rows(), 2 * mp + md);
  ASSERT_EQ(pp.H_pdelta.cols(), 4);
  EXPECT_EQ(pp.H_pdelta.topLeftCorner(mp, 2), prob.P().A());
  EXPECT_TRUE(pp.H_pdelta.topRightCorner(mp, 2).isZero());
  EXPECT_TRUE(pp.H_pdelta.block(mp, 0, md, 2).isZero());
  EXPECT_EQ(pp.H_pdelta.block(mp, 2, md, 2), prob.R().A());
  EXPECT_EQ(pp.H_pdelta.bottomLeftCorner(mp, 2), prob.P().A());
  EXPECT_EQ(pp.H_pdelta.bottomRightCorner(mp, 2), prob.P().A());
  // (p, p~) is feasible exactly when p, p~ and p + p~ are.
  const HPolytope joint(pp.H_pdelta, pp.h_pdelta);
  EXPECT_TRUE(contains(joint, Eigen::Vector4d(0.5, 0.5, 0.2, -0.2)));
  EXPECT_FALSE(contains(joint, Eigen::Vector4d(0.5, 0.5, 0.3, -0.3)));
  EXPECT_FALSE(contains(joint, Eigen::Vector4d(0.9, 0.1, 0.2, -0.2)));
}

TEST(Sampler, StepsStayOnSimplexAndWithinRate) {
  const LpvProblem& prob = example1().cfg.problem;
  std::mt19937_64 rng(9);
  VectorXd p = prob.vertices_P().vertices.front();
  for (int i = 0; i < 10000; ++i) {
    const VectorXd next = sample_parameter_step(p, prob, rng);
    ASSERT_NEAR(next.sum(), 1.0, 1e-9);
    ASSERT_TRUE(contains(prob.P(), next, 1e-9));
    ASSERT_TRUE(contains(prob.R(), next - p, 1e-9));
    p = next;
  }
  for (int i = 0; i < 1000; ++i) ASSERT_TRUE(contains(prob.P(), sample_parameter(prob, rng), 1e-9));
}

TEST(Sampler, ZeroRateKeepsParameter) {
  const LpvProblem& prob = example1().cfg.problem;
  const LpvProblem frozen = prob.with_rate_bound(HPolytope::symmetric_box(VectorXd::Zero(2)));
  std::mt19937_64 rng(2);
  const Eigen::Vector2d p(0.3, 0.7);
  for (int i = 0; i < 100; ++i) EXPECT_LE((sample_parameter_step(p, frozen, rng) - p).norm(), 1e-12);
}
