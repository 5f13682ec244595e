#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles/rational_vertices.hpp"
#include "pdrci/polytope.hpp"

using namespace pdrci;

namespace {

HPolytope unit_square() { return HPolytope::symmetric_box(Eigen::Vector2d(1.0, 1.0)); }

struct IntPolytope {
  Eigen::MatrixXi a;
  Eigen::VectorXi b;
  HPolytope as_double() const { return HPolytope(a.cast<double>(), b.cast<double>()); }
};

// Box |x| <= 5 cut by random integer half-spaces that keep the origin inside.
IntPolytope random_int_polytope(std::mt19937_64& rng, int extra) {
  std::uniform_int_distribution<int> coef(-3, 3), off(2, 8);
  IntPolytope p;
  p.a.resize(6 + extra, 3);
  p.b.resize(6 + extra);
  p.a.topRows(3) = Eigen::Matrix3i::Identity();
  p.a.middleRows(3, 3) = -Eigen::Matrix3i::Identity();
  p.b.head(6).setConstant(5);
  for (int i = 0; i < extra; ++i) {
    Eigen::Vector3i row;
    do {
      row = Eigen::Vector3i(coef(rng), coef(rng), coef(rng));
    } while (row.isZero());
    p.a.row(6 + i) = row.transpose();
    p.b(6 + i) = off(rng);
  }
  return p;
}

VectorXd random_direction(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  VectorXd c(n);
  for (int i = 0; i < n; ++i) c(i) = g(rng);
  return c.normalized();
}

double max_over_vertices(const VPolytope& v, const VectorXd& c) {
  double best = -INFINITY;
  for (const auto& x : v.vertices) best = std::max(best, c.dot(x));
  return best;
}

}  // namespace

TEST(SupportValue, UnitBox) {
  EXPECT_NEAR(support_value(unit_square(), Eigen::Vector2d(1.0, 0.0)), 1.0, 1e-7);
}

TEST(SupportValue, DegenerateDisturbanceSegment) {
  const HPolytope w = HPolytope::symmetric_box(Eigen::Vector2d(0.25, 0.0));
  EXPECT_NEAR(support_value(w, Eigen::Vector2d(1.0, 1.0)), 0.25, 1e-7);
}

TEST(SupportValue, MatchesVertexMaximum) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const HPolytope p = random_int_polytope(rng, 6).as_double();
    const VPolytope v = enumerate_vertices(p);
    for (int k = 0; k < 10; ++k) {
      const VectorXd c = random_direction(rng, 3);
      EXPECT_NEAR(support_value(p, c), max_over_vertices(v, c), 1e-7);
    }
  }
}

TEST(SupportValue, Errors) {
  const HPolytope half(Eigen::RowVector2d(1.0, 0.0), Eigen::VectorXd::Ones(1));
  EXPECT_THROW(
      {
        try {
          support_value(half, Eigen::Vector2d(0.0, 1.0));
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::kUnbounded);
          throw;
        }
      },
      Error);
  Eigen::MatrixXd a(2, 1);
  a << 1.0, -1.0;
  const HPolytope empty(a, Eigen::Vector2d(-1.0, -1.0));
  try {
    support_value(empty, Eigen::VectorXd::Ones(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
  }
}

TEST(EnumerateVertices, UnitSquare) {
  const auto rep = enumerate_vertices_report(unit_square());
  ASSERT_EQ(rep.vertices.size(), 4);
  EXPECT_TRUE(rep.simple);
  for (const auto& v : rep.vertices.vertices) {
    EXPECT_NEAR(std::abs(v(0)), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(v(1)), 1.0, 1e-12);
  }
  ASSERT_TRUE(rep.vertices.active_sets.has_value());
  // first found is rows {0, 1}: x = 1, y = 1
  EXPECT_EQ((*rep.vertices.active_sets)[0], (std::vector<int>{0, 1}));
  EXPECT_TRUE(vertices_irredundant(rep.vertices));
}

TEST(EnumerateVertices, MatchesExactOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 15; ++trial) {
    const IntPolytope ip = random_int_polytope(rng, 5);
    const auto exact = oracle::vertices3(ip.a, ip.b);
    const VPolytope v = enumerate_vertices(ip.as_double());
    ASSERT_EQ(static_cast<int>(exact.size()), v.size()) << "trial " << trial;
    for (const auto& q : exact) {
      Eigen::Vector3d x(q[0].get_d(), q[1].get_d(), q[2].get_d());
      bool found = false;
      for (const auto& y : v.vertices) found = found || (x - y).cwiseAbs().maxCoeff() < 1e-7;
      EXPECT_TRUE(found) << "trial " << trial;
    }
  }
}

TEST(EnumerateVertices, NonSimpleApex) {
  // Square pyramid: four facets meet at the apex.
  Eigen::MatrixXd a(5, 3);
  a << 1, 0, 1, -1, 0, 1, 0, 1, 1, 0, -1, 1, 0, 0, -1;
  const HPolytope p(a, Eigen::VectorXd::Ones(5));
  const auto rep = enumerate_vertices_report(p);
  EXPECT_FALSE(rep.simple);
  EXPECT_EQ(rep.vertices.size(), 5);
  EnumerationOptions strict;
  strict.require_simple = true;
  try {
    enumerate_vertices_report(p, strict);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
}

TEST(EnumerateVertices, UnboundedRejected) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 0, 0, 1;
  try {
    enumerate_vertices(HPolytope(a, Eigen::Vector2d(1, 1)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnbounded);
  }
  EXPECT_FALSE(is_bounded(HPolytope(a, Eigen::Vector2d(1, 1))));
  EXPECT_TRUE(is_bounded(unit_square()));
}

TEST(Contains, Basics) {
  EXPECT_TRUE(contains(unit_square(), Eigen::Vector2d(0.0, 0.0)));
  EXPECT_FALSE(contains(unit_square(), Eigen::Vector2d(1.0 + 1e-3, 0.0), 1e-8));
}

TEST(HullRoundTrip, SupportValuesAgree) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int dim = 2; dim <= 4; ++dim) {
    std::vector<VectorXd> pts;
    for (int i = 0; i < 30; ++i) pts.push_back(VectorXd::NullaryExpr(dim, [&] { return g(rng); }));
    const HPolytope h = hull_hrep(pts);
    const VPolytope v = enumerate_vertices(h);
    VPolytope cloud;
    cloud.vertices = pts;
    for (int k = 0; k < 100; ++k) {
      const VectorXd c = random_direction(rng, dim);
      EXPECT_NEAR(max_over_vertices(v, c), max_over_vertices(cloud, c), 1e-7);
    }
    EXPECT_EQ(hull_vertices(pts).size(), v.size());
  }
}

TEST(Project, BoxDropsInput) {
  const HPolytope box3 = HPolytope::symmetric_box(Eigen::Vector3d(1.0, 2.0, 3.0));
  const HPolytope proj = project(box3, 2);
  const VPolytope v = enumerate_vertices(proj);
  EXPECT_EQ(v.size(), 4);
  for (const auto& x : v.vertices) {
    EXPECT_NEAR(std::abs(x(0)), 1.0, 1e-9);
    EXPECT_NEAR(std::abs(x(1)), 2.0, 1e-9);
  }
}

TEST(Project, SupportMatchesLiftedLp) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const HPolytope p = random_int_polytope(rng, 6).as_double();
    const HPolytope proj = project(p, 2);
    for (int k = 0; k < 10; ++k) {
      const VectorXd c2 = random_direction(rng, 2);
      Eigen::Vector3d c3(c2(0), c2(1), 0.0);
      EXPECT_NEAR(support_value(proj, c2), support_value(p, c3), 1e-7);
    }
  }
}

TEST(MinimalHrep, DropsRedundantRows) {
  Eigen::MatrixXd a(6, 2);
  a << 1, 0, 0, 1, -1, 0, 0, -1, 2, 0, 1, 1;
  Eigen::VectorXd b(6);
  b << 1, 1, 1, 1, 2, 5;
  const HPolytope m = minimal_hrep(HPolytope(a, b));
  EXPECT_EQ(m.rows(), 4);
}

TEST(Volume, Basics) {
  VPolytope sq = enumerate_vertices(unit_square());
  EXPECT_NEAR(volume(sq), 4.0, 1e-12);
  VPolytope simplex;
  simplex.vertices = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0),
                      Eigen::Vector3d(0, 0, 1)};
  EXPECT_NEAR(volume(simplex), 1.0 / 6.0, 1e-12);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> side(0.5, 3.0);
  const Eigen::Vector4d s(side(rng), side(rng), side(rng), side(rng));
  const VPolytope box4 = enumerate_vertices(HPolytope::box(Eigen::Vector4d::Zero(), s));
  EXPECT_NEAR(volume(box4), s.prod(), 1e-9 * s.prod());
}

TEST(Volume, ScalesWithPowerOfDimension) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const HPolytope p = random_int_polytope(rng, 6).as_double();
    const double v1 = volume(enumerate_vertices(p));
    for (double alpha : {0.5, 2.0}) {
      const double va = volume(enumerate_vertices(p.scaled(alpha)));
      EXPECT_NEAR(va, std::pow(alpha, 3) * v1, 1e-6 * va);
    }
  }
}

TEST(Volume, DegenerateRejected) {
  VPolytope seg;
  seg.vertices = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(2, 2)};
  try {
    volume(seg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
}

TEST(DistanceMetric, IdentityCoverIsZero) {
  const HPolytope x = HPolytope::symmetric_box(Eigen::Vector2d(5.0, 5.0));
  const VPolytope xv = enumerate_vertices(x);
  EXPECT_NEAR(distance_metric(x, xv, x.normalized().A()), 0.0, 1e-6);
}

TEST(DistanceMetric, AntitoneUnderInclusion) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  const HPolytope x = HPolytope::symmetric_box(Eigen::Vector2d(5.0, 5.0));
  const VPolytope xv = enumerate_vertices(x);
  const MatrixXd d = x.normalized().A();
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Vector2d lo1(-5 * u(rng), -5 * u(rng)), hi1(5 * u(rng), 5 * u(rng));
    const Eigen::Vector2d lo2 = lo1.cwiseMin(lo1 * (1.0 + u(rng))).cwiseMax(-5.0);
    const Eigen::Vector2d hi2 = hi1.cwiseMax(hi1 * (1.0 + u(rng))).cwiseMin(5.0);
    const double d1 = distance_metric(HPolytope::box(lo1, hi1), xv, d);
    const double d2 = distance_metric(HPolytope::box(lo2, hi2), xv, d);
    EXPECT_LE(d2, d1 + 1e-7);
    // For boxes the cover slack is the per-side gap.
    const double expected = (5.0 - hi1(0)) + (5.0 - hi1(1)) + (5.0 + lo1(0)) + (5.0 + lo1(1));
    EXPECT_NEAR(d1, expected, 1e-6);
  }
}

TEST(VerticesIrredundant, DetectsInteriorPoint) {
  VPolytope v;
  v.vertices = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1),
                Eigen::Vector2d(0.2, 0.2)};
  EXPECT_FALSE(vertices_irredundant(v));
  v.vertices.pop_back();
  EXPECT_TRUE(vertices_irredundant(v));
}
