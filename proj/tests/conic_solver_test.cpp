#include "pdrci/conic_solver.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <random>

namespace pdrci::conic {
namespace {

SparseMatrix to_sparse(const Eigen::MatrixXd& m) { return m.sparseView(); }

Problem empty_eq(Problem p) {
  p.A.resize(0, p.c.size());
  p.b.resize(0);
  return p;
}

TEST(ConicSolverTest, SvecRoundTrip) {
  Eigen::MatrixXd m(3, 3);
  m << 4, 1, 2, 1, 5, 3, 2, 3, 6;
  const Eigen::VectorXd v = svec(m);
  EXPECT_EQ(v.size(), 6);
  EXPECT_NEAR(v.squaredNorm(), (m * m).trace(), 1e-12);
  EXPECT_TRUE(smat(v, 3).isApprox(m, 1e-14));
  EXPECT_EQ(svec_index(3, 2, 1), 4);
}

TEST(ConicSolverTest, SmallLp) {
  // min -x1 - x2  s.t. x1 + 2 x2 <= 4, 3 x1 + x2 <= 6, x >= 0.  Optimum (1.6, 1.2).
  Problem p;
  p.c = Eigen::Vector2d(-1, -1);
  Eigen::MatrixXd g(4, 2);
  g << 1, 2, 3, 1, -1, 0, 0, -1;
  p.G = to_sparse(g);
  p.h = Eigen::Vector4d(4, 6, 0, 0);
  p.cones.nonneg = 4;
  p = empty_eq(p);
  const Result r = solve(p);
  ASSERT_EQ(r.status, Status::kOptimal);
  EXPECT_NEAR(r.x(0), 1.6, 1e-7);
  EXPECT_NEAR(r.x(1), 1.2, 1e-7);
  EXPECT_NEAR(r.pcost, -2.8, 1e-7);
}

TEST(ConicSolverTest, LpWithEqualityAndFreeVariable) {
  // min x1 + 2 x2 + 3 x3  s.t. x1 + x2 + x3 = 1, x >= 0.  Optimum at e1.
  Problem p;
  p.c = Eigen::Vector3d(1, 2, 3);
  p.A = to_sparse(Eigen::RowVector3d(1, 1, 1));
  p.b = Eigen::VectorXd::Ones(1);
  p.G = to_sparse(-Eigen::Matrix3d::Identity());
  p.h = Eigen::Vector3d::Zero();
  p.cones.nonneg = 3;
  const Result r = solve(p);
  ASSERT_EQ(r.status, Status::kOptimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-7);
  EXPECT_NEAR(r.pcost, 1.0, 1e-7);
}

TEST(ConicSolverTest, DetectsPrimalInfeasibility) {
  // x <= -1 and x >= 1.
  Problem p;
  p.c = Eigen::VectorXd::Ones(1);
  Eigen::MatrixXd g(2, 1);
  g << 1, -1;
  p.G = to_sparse(g);
  p.h = Eigen::Vector2d(-1, -1);
  p.cones.nonneg = 2;
  p = empty_eq(p);
  EXPECT_EQ(solve(p).status, Status::kPrimalInfeasible);
}

TEST(ConicSolverTest, DetectsDualInfeasibility) {
  // min -x  s.t. x >= 0 (unbounded).
  Problem p;
  p.c = -Eigen::VectorXd::Ones(1);
  p.G = to_sparse(-Eigen::MatrixXd::Identity(1, 1));
  p.h = Eigen::VectorXd::Zero(1);
  p.cones.nonneg = 1;
  p = empty_eq(p);
  EXPECT_EQ(solve(p).status, Status::kDualInfeasible);
}

TEST(ConicSolverTest, MinimumEigenvalueSdp) {
  // max t  s.t.  M - t I >= 0  gives t = lambda_min(M).
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    const int k = 2 + trial % 3;
    Eigen::MatrixXd m(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) m(i, j) = nd(rng);
    m = 0.5 * (m + m.transpose()).eval();
    Problem p;
    p.c = -Eigen::VectorXd::Ones(1);
    p.G = to_sparse(svec(Eigen::MatrixXd::Identity(k, k)));
    p.h = svec(m);
    p.cones.psd = {k};
    p = empty_eq(p);
    const Result r = solve(p);
    ASSERT_EQ(r.status, Status::kOptimal);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    EXPECT_NEAR(r.x(0), es.eigenvalues()(0), 1e-7);
  }
}

TEST(ConicSolverTest, MixedConesWithEqualities) {
  // min trace(C X) s.t. trace(X) = 1, X >= 0 (primal form as free svec vars):
  // optimum is lambda_min(C).  Encode x = svec(X), -x + s = 0, s in PSD.
  Eigen::Matrix3d cm;
  cm << 2, -1, 0, -1, 2, -1, 0, -1, 2;
  Problem p;
  p.c = svec(cm);
  p.A = to_sparse(svec(Eigen::Matrix3d::Identity()).transpose());
  p.b = Eigen::VectorXd::Ones(1);
  p.G = to_sparse(-Eigen::MatrixXd::Identity(6, 6));
  p.h = Eigen::VectorXd::Zero(6);
  p.cones.psd = {3};
  const Result r = solve(p);
  ASSERT_EQ(r.status, Status::kOptimal);
  EXPECT_NEAR(r.pcost, 2.0 - std::sqrt(2.0), 1e-7);
}

TEST(ConicSolverTest, RandomFeasibleLpsCertifyOptimality) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 4, m = 2 * n + 4;
    Eigen::MatrixXd g(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = ud(rng);
    // Box rows keep the problem bounded.
    g.topRows(n) = Eigen::MatrixXd::Identity(n, n);
    g.middleRows(n, n) = -Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd h = Eigen::VectorXd::Ones(m) + 0.5 * Eigen::VectorXd::Random(m).cwiseAbs();
    Problem p;
    p.c = Eigen::VectorXd::Random(n);
    p.G = to_sparse(g);
    p.h = h;
    p.cones.nonneg = m;
    p = empty_eq(p);
    const Result r = solve(p);
    ASSERT_EQ(r.status, Status::kOptimal);
    // Primal feasibility, dual feasibility, and zero gap.
    EXPECT_LE((g * r.x - h).maxCoeff(), 1e-7);
    EXPECT_GE(r.z.minCoeff(), -1e-9);
    EXPECT_LE((g.transpose() * r.z + p.c).norm(), 1e-7);
    EXPECT_NEAR(p.c.dot(r.x), -h.dot(r.z), 1e-7);
  }
}

}  // namespace
}  // namespace pdrci::conic
