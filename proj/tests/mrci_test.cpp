#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "pdrci/mrci.hpp"

using namespace pdrci;
using namespace fixtures;

TEST(Mrci, ExampleOneSetIsRobustControlInvariant) {
  const LpvProblem& prob = example1().cfg.problem;
  const MrciResult res = mrci_detail(prob);
  const HPolytope& omega = res.set;
  EXPECT_EQ(omega.rows(), 12);
  for (int i = 0; i < omega.rows(); ++i) EXPECT_NEAR(omega.A().row(i).norm(), 1.0, 1e-12);
  const VPolytope xv = enumerate_vertices(prob.X());
  EXPECT_NEAR(distance_metric(omega, xv, omega.A()), 53.20, 0.05 * 53.20);

  // Every vertex admits, for every parameter vertex, an input keeping all disturbed successors inside.
  const auto& wv = prob.vertices_W().vertices;
  for (const auto& x : enumerate_vertices(omega).vertices) {
    EXPECT_TRUE(contains(prob.X(), x, 1e-9));
    for (const auto& p : prob.vertices_P().vertices) {
      const auto [a, b] = evaluate_matrices(prob.sys(), p);
      MatrixXd g(omega.rows() * wv.size() + prob.U().rows(), 1);
      VectorXd h(g.rows());
      int r = 0;
      for (const auto& w : wv) {
        g.middleRows(r, omega.rows()) = omega.A() * b;
        h.segment(r, omega.rows()) = omega.b() - omega.A() * (a * x + w) + VectorXd::Constant(omega.rows(), 1e-9);
        r += omega.rows();
      }
      g.bottomRows(prob.U().rows()) = prob.U().A();
      h.tail(prob.U().rows()) = prob.U().b();
      EXPECT_EQ(lp::minimize(VectorXd::Zero(1), g, h).status, lp::Status::kOptimal);
    }
  }
}
