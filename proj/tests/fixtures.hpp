#pragma once

// Shipped example bundles and small helpers shared by the unit suites.

#include <random>
#include <string>

#include "pdrci/linprog.hpp"
#include "pdrci/run_config.hpp"

namespace fixtures {

using namespace pdrci;

inline std::string config_path(const std::string& rel) { return std::string(PDRCI_CONFIG_DIR) + "/" + rel; }

inline RunConfig example(const std::string& rel) { return load_run_config(config_path(rel)); }

// Example 1 with its MRCI template and synthesized solution, built once per process.
struct Example1 {
  RunConfig cfg;
  ConfiguredTemplate tmpl;
  PdRciSolution sol;
};

inline const Example1& example1() {
  static const Example1 ex = [] {
    Example1 e;
    e.cfg = example("example1/run.json");
    e.tmpl = build_configured_template(e.cfg).tmpl;
    e.sol = run_synthesis(e.cfg, e.tmpl);
    return e;
  }();
  return ex;
}

inline VectorXd zeta_param(double zeta) { return Eigen::Vector2d(0.5 + 2.0 * zeta, 0.5 - 2.0 * zeta); }

inline VectorXd random_unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v.normalized();
}

// max c'x over {A x <= b} by the LP solver, used as an independent oracle.
inline double lp_support(const MatrixXd& a, const VectorXd& b, const VectorXd& c) {
  const lp::Result r = lp::minimize(-c, a, b);
  EXPECT_EQ(r.status, lp::Status::kOptimal);
  return -r.value;
}

inline double vertex_support(const VPolytope& v, const VectorXd& c) {
  double best = -1e300;
  for (const auto& x : v.vertices) best = std::max(best, c.dot(x));
  return best;
}

}  // namespace fixtures
