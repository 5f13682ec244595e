#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "pdrci/config_template.hpp"

using namespace pdrci;
using namespace fixtures;

namespace {

MatrixXd square_c() {
  MatrixXd c(4, 2);
  c << 1, 0, 0, 1, -1, 0, 0, -1;
  return c;
}

MatrixXd vehicle_c_hat() {
  MatrixXd cb(4, 16);
  for (int v = 0; v < 16; ++v) {
    for (int i = 0; i < 4; ++i) cb(i, v) = ((v >> i) & 1) ? 1.0 : -1.0;
  }
  MatrixXd c(24, 4);
  c << MatrixXd::Identity(4, 4), -MatrixXd::Identity(4, 4), 0.75 * cb.transpose();
  return c;
}

void expect_structure(const ConfiguredTemplate& t) {
  for (int k = 0; k < t.N(); ++k) {
    const auto& j = t.active_sets[k];
    ASSERT_EQ(static_cast<int>(j.size()), t.n());
    MatrixXd cj(t.n(), t.n()), vj(t.n(), t.n());
    for (int a = 0; a < t.n(); ++a) {
      cj.row(a) = t.C.row(j[a]);
      vj.col(a) = t.V[k].col(j[a]);
    }
    EXPECT_LE((cj * vj - MatrixXd::Identity(t.n(), t.n())).cwiseAbs().maxCoeff(), 1e-9);
    for (int col = 0; col < t.ms(); ++col) {
      if (std::find(j.begin(), j.end(), col) == j.end()) EXPECT_EQ(t.V[k].col(col).norm(), 0.0);
    }
  }
  EXPECT_LE(check_configuration(t, t.seed_sigma), t.ms() * 1e-8);
}

}  // namespace

TEST(UniformPolygon, RowsOnUnitCircle) {
  for (int m : {3, 4, 8, 30}) {
    const MatrixXd c = uniform_polygon(m);
    ASSERT_EQ(c.rows(), m);
    for (int i = 0; i < m; ++i) {
      EXPECT_NEAR(c.row(i).norm(), 1.0, 1e-15);
      EXPECT_NEAR(c(i, 0), std::cos(2.0 * std::numbers::pi * i / m), 1e-15);
    }
  }
}

TEST(BuildTemplate, UnitSquare) {
  const ConfiguredTemplate t = build_template(square_c(), VectorXd::Ones(4));
  EXPECT_EQ(t.N(), 4);
  EXPECT_EQ(t.E.rows(), 16);
  expect_structure(t);
  // E is the stack of C V^k - I.
  for (int k = 0; k < t.N(); ++k) {
    const MatrixXd block = t.C * t.V[k] - MatrixXd::Identity(4, 4);
    EXPECT_LE((t.E.middleRows(4 * k, 4) - block).cwiseAbs().maxCoeff(), 1e-12);
  }
  const VPolytope v = vertices_at(t, VectorXd::Ones(4));
  for (const auto& x : v.vertices) {
    EXPECT_NEAR(std::abs(x(0)), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(x(1)), 1.0, 1e-12);
  }
  Eigen::Vector4d rect(2, 1, 2, 1);
  for (const auto& x : vertices_at(t, rect).vertices) {
    EXPECT_NEAR(std::abs(x(0)), 2.0, 1e-12);
    EXPECT_NEAR(std::abs(x(1)), 1.0, 1e-12);
  }
  EXPECT_GT(check_configuration(t, -t.seed_sigma), 0.0);
}

TEST(BuildTemplate, ThirtyGonPairsAdjacentRows) {
  const ConfiguredTemplate t = build_template(uniform_polygon(30));
  EXPECT_EQ(t.N(), 30);
  expect_structure(t);
  for (const auto& j : t.active_sets) {
    const int gap = std::abs(j[0] - j[1]);
    EXPECT_TRUE(gap == 1 || gap == 29);
  }
}

TEST(BuildTemplate, ErrorsOnBadSeeds) {
  try {
    build_template(vehicle_c_hat());
    FAIL() << "expected NonSimpleSeed";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonSimpleSeed);
  }
  MatrixXd half(2, 2);
  half << 1, 0, 0, 1;
  try {
    build_template(half);
    FAIL() << "expected UnboundedSeed";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnboundedSeed);
  }
  try {
    vertices_at(build_template(square_c()), Eigen::Vector4d(1, 1, -2, 1));
    FAIL() << "expected ConfigurationViolated";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigurationViolated);
  }
}

TEST(BuildTemplate, VehicleTemplateHas48Vertices) {
  MatrixXd w(4, 4);
  w << 0.3819, -0.0432, -0.0542, 0.0438, 0.0057, 2.8432, -0.1253, 0.4704, -0.0225, -0.0423, 0.0241, -0.0451,
      0.0069, 0.0712, 0.0583, 0.6544;
  TemplateOptions opts;
  opts.allow_nonsimple = true;
  const ConfiguredTemplate t = build_template(vehicle_c_hat() * w.inverse(), opts);
  EXPECT_EQ(t.N(), 48);
  expect_structure(t);
  const VPolytope v = vertices_at(t, t.seed_sigma);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const VectorXd c = random_unit(rng, 4);
    EXPECT_NEAR(vertex_support(v, c), lp_support(t.C, t.seed_sigma, c), 1e-6);
  }
}

TEST(BuildTemplate, RandomConeOffsetsKeepConfiguration) {
  const ConfiguredTemplate t = build_template(uniform_polygon(8));
  // Conic combinations of feasible seeds: unit offsets, and translates y = sigma + C x0.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Vector2d x0(u(rng) - 0.5, u(rng) - 0.5);
    const VectorXd y1 = t.seed_sigma + t.C * x0;
    const VectorXd y2 = 0.5 * t.seed_sigma;
    const VectorXd y = u(rng) * y1 + u(rng) * y2;
    ASSERT_LE(check_configuration(t, y1), 1e-9);
    ASSERT_LE(check_configuration(t, y), 1e-9);
    const VPolytope v = vertices_at(t, y);
    for (int k = 0; k < t.N(); ++k) {
      const VectorXd r = t.C * v.vertices[k] - y;
      EXPECT_LE(r.maxCoeff(), 1e-7);
      for (int j : t.active_sets[k]) EXPECT_NEAR(r(j), 0.0, 1e-7);
    }
  }
}

TEST(VerticesAt, ExampleOneHullMatchesLp) {
  const Example1& ex = example1();
  const VectorXd y = ex.sol.y0 + ex.sol.Y * Eigen::Vector2d(0, 1);
  const VPolytope v = vertices_at(ex.tmpl, y);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const VectorXd c = random_unit(rng, 2);
    EXPECT_NEAR(vertex_support(v, c), lp_support(ex.tmpl.C, y, c), 1e-6);
  }
  for (int i = 0; i <= 20; ++i) {
    const VectorXd p = zeta_param(-0.25 + 0.025 * i);
    EXPECT_LE(check_configuration(ex.tmpl, ex.sol.y0 + ex.sol.Y * p), 1e-7);
  }
}
