#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "pdrci/runtime.hpp"

using namespace pdrci;
using namespace fixtures;

namespace {

// Minimum-norm point of {lambda >= 0 : A lambda = b} by enumerating supports: the optimum is the
// minimum-norm solution of A_F lambda_F = b for its own support F.
VectorXd enumerate_min_norm(const MatrixXd& a, const VectorXd& b) {
  const int nv = static_cast<int>(a.cols());
  VectorXd best;
  for (int mask = 1; mask < (1 << nv); ++mask) {
    std::vector<int> cols;
    for (int i = 0; i < nv; ++i) {
      if (mask & (1 << i)) cols.push_back(i);
    }
    MatrixXd af(a.rows(), cols.size());
    for (size_t j = 0; j < cols.size(); ++j) af.col(j) = a.col(cols[j]);
    const VectorXd lf = af.completeOrthogonalDecomposition().solve(b);
    if ((af * lf - b).norm() > 1e-9 || lf.minCoeff() < -1e-12) continue;
    VectorXd lambda = VectorXd::Zero(nv);
    for (size_t j = 0; j < cols.size(); ++j) lambda(cols[j]) = lf(j);
    if (best.size() == 0 || lambda.norm() < best.norm()) best = lambda;
  }
  return best;
}

ControllerState square_controller(double w_max) {
  MatrixXd c(4, 2);
  c << 1, 0, 0, 1, -1, 0, 0, -1;
  const HPolytope unit = HPolytope::symmetric_box(VectorXd::Ones(2));
  LpvData data{LpvSystem({MatrixXd::Identity(2, 2) * 0.5}, {MatrixXd::Identity(2, 2)}), unit, unit,
               HPolytope::symmetric_box(VectorXd::Constant(2, w_max)),
               HPolytope::box(VectorXd::Ones(1), VectorXd::Ones(1)), HPolytope::symmetric_box(VectorXd::Zero(1))};
  ControllerState ctrl;
  ctrl.tmpl = build_template(c);
  ctrl.problem = LpvProblem(std::move(data));
  ctrl.solution = synthesize(make_synthesis_spec(ctrl.problem, ctrl.tmpl));
  return ctrl;
}

}  // namespace

TEST(MinNormSimplexQp, MatchesSupportEnumeration) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 2, nv = n + 2 + trial % 4;
    MatrixXd a(n + 1, nv);
    for (int k = 0; k < nv; ++k) {
      for (int i = 0; i < n; ++i) a(i, k) = u(rng);
      a(n, k) = 1.0;
    }
    VectorXd w(nv);
    for (int k = 0; k < nv; ++k) w(k) = pos(rng) * pos(rng);
    w /= w.sum();
    const VectorXd b = a * w;
    const VectorXd got = min_norm_simplex_qp(a, b);
    const VectorXd ref = enumerate_min_norm(a, b);
    ASSERT_EQ(ref.size(), nv);
    EXPECT_GE(got.minCoeff(), 0.0);
    EXPECT_LE((a * got - b).norm(), 1e-9);
    EXPECT_NEAR(got.norm(), ref.norm(), 1e-9);
    EXPECT_LE((got - ref).lpNorm<Eigen::Infinity>(), 1e-6);
  }
  MatrixXd a(2, 2);
  a << 1, 2, 1, 1;
  try {
    min_norm_simplex_qp(a, Eigen::Vector2d(3.0, 1.0));
    FAIL() << "expected QPInfeasible";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kQpInfeasible);
  }
}

TEST(Control, VertexAndEdgeWeights) {
  const ControllerState ctrl = square_controller(0.0);
  const VectorXd p = VectorXd::Ones(1);
  const VectorXd y = ctrl.solution.y0 + ctrl.solution.Y * p;
  const VPolytope v = vertices_at(ctrl.tmpl, y);
  for (int k = 0; k < v.size(); ++k) {
    const ControlResult r = control_detail(v.vertices[k], p, ctrl);
    EXPECT_NEAR(r.lambda(k), 1.0, 1e-9);
    EXPECT_NEAR(r.lambda.sum(), 1.0, 1e-9);
    EXPECT_LE((r.u - ctrl.solution.u0[k] - ctrl.solution.U[k] * p).norm(), 1e-9);
  }
  const VectorXd mid = 0.5 * (v.vertices[0] + v.vertices[1]);
  const ControlResult r = control_detail(mid, p, ctrl);
  int halves = 0;
  for (int k = 0; k < r.lambda.size(); ++k) halves += std::abs(r.lambda(k) - 0.5) < 1e-9;
  EXPECT_EQ(halves, 2);
  EXPECT_NEAR(r.lambda.sum(), 1.0, 1e-12);
}

TEST(Control, OutsideSetThrows) {
  const Example1& ex = example1();
  const ControllerState ctrl{ex.sol, ex.tmpl, ex.cfg.problem};
  try {
    control(Eigen::Vector2d(100.0, 0.0), Eigen::Vector2d(0.5, 0.5), ctrl);
    FAIL() << "expected OutsideSet";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutsideSet);
  }
}

TEST(Simulate, ExampleOneStaysInvariant) {
  const Example1& ex = example1();
  const ControllerState ctrl{ex.sol, ex.tmpl, ex.cfg.problem};
  const LpvProblem& prob = ex.cfg.problem;
  std::mt19937_64 rng(21);
  const VectorXd p0 = Eigen::Vector2d(0.0, 1.0);
  const VPolytope v0 = vertices_at(ex.tmpl, ex.sol.y0 + ex.sol.Y * p0);
  for (auto mode : {DisturbanceMode::kVertices, DisturbanceMode::kInterior}) {
    SimulationOptions opts;
    opts.disturbance = mode;
    const Trajectory traj = simulate(ctrl, v0.vertices[3], p0, 1000, rng, opts);
    EXPECT_TRUE(traj.violations.empty());
    ASSERT_EQ(traj.steps(), 1000);
    for (int t = 0; t < traj.steps(); ++t) {
      const VectorXd& p = traj.params[t];
      EXPECT_LE((prob.U().A() * traj.inputs[t] - prob.U().b()).maxCoeff(), 1e-7);
      EXPECT_TRUE(contains(prob.R(), traj.params[t + 1] - p, 1e-9));
      // x(t+1) lies in S(p+) for both extreme admissible p+ (P(p) is a segment on the simplex).
      for (double step : {-0.2, 0.2}) {
        const double t0 = std::clamp(step, -p(0), p(1));
        const Eigen::Vector2d next(p(0) + t0, p(1) - t0);
        EXPECT_LE((ex.tmpl.C * traj.states[t + 1] - ex.sol.y0 - ex.sol.Y * next).maxCoeff(), 1e-6);
      }
    }
  }
}

TEST(Simulate, TrivialDisturbanceFreeSystem) {
  const ControllerState ctrl = square_controller(0.0);
  std::mt19937_64 rng(1);
  const Trajectory traj = simulate(ctrl, Eigen::Vector2d(0.9, -0.7), VectorXd::Ones(1), 50, rng);
  EXPECT_TRUE(traj.violations.empty());
  for (const auto& w : traj.disturbances) EXPECT_EQ(w.norm(), 0.0);
  for (const auto& p : traj.params) EXPECT_EQ(p(0), 1.0);
}

TEST(Simulate, StopsAtFirstViolation) {
  const Example1& ex = example1();
  const ControllerState ctrl{ex.sol, ex.tmpl, ex.cfg.problem};
  std::mt19937_64 rng(1);
  const Trajectory traj = simulate(ctrl, Eigen::Vector2d(100.0, 0.0), Eigen::Vector2d(0.5, 0.5), 10, rng);
  ASSERT_EQ(traj.violations.size(), 1u);
  EXPECT_EQ(traj.violations[0].kind, "membership");
  EXPECT_EQ(traj.steps(), 0);
}

TEST(TrajectoryCsv, Shape) {
  const Example1& ex = example1();
  const ControllerState ctrl{ex.sol, ex.tmpl, ex.cfg.problem};
  std::mt19937_64 rng(4);
  const Trajectory traj = simulate(ctrl, Eigen::Vector2d::Zero(), Eigen::Vector2d(0.5, 0.5), 5, rng);
  std::istringstream in(trajectory_csv(traj));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x0,x1,u0,p0,p1,w0,w1,max_residual");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8);
    last = line;
    ++rows;
  }
  EXPECT_EQ(rows, 6);
  EXPECT_NE(last.find(",,"), std::string::npos);
}
