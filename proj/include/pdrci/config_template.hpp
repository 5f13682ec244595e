#pragma once

// Configuration-constrained polytope templates {x : C x <= y} with fixed vertex combinatorics.

#include <vector>

#include "pdrci/polytope.hpp"

namespace pdrci {

struct ConfiguredTemplate {
  MatrixXd C;                 // m_s x n, unit-norm rows
  std::vector<MatrixXd> V;    // N maps (n x m_s), x^k = V^k y
  // Stack of C V - I over every invertible n-subset of every seed vertex's active rows.
  // For a simple seed this is one block per V^k, in the same order.
  MatrixXd E;
  std::vector<std::vector<int>> active_sets;
  VectorXd seed_sigma;        // offsets in the normalized row scaling

  int n() const { return static_cast<int>(C.cols()); }
  int ms() const { return static_cast<int>(C.rows()); }
  int N() const { return static_cast<int>(V.size()); }
};

struct TemplateOptions {
  Tolerances tol{};
  // Accept seed vertices with more than n active rows. Each such vertex keeps one vertex map,
  // and the cone gets one block per invertible n-subset of its active rows so that all of
  // them keep producing the same point.
  bool allow_nonsimple = false;
};

// Normalizes the rows of C (and sigma alike) and builds the vertex maps at the seed.
ConfiguredTemplate build_template(const MatrixXd& c, const VectorXd& sigma, const TemplateOptions& opts = {});
ConfiguredTemplate build_template(const MatrixXd& c, const TemplateOptions& opts = {});

// Rows (cos(2 pi i / m), sin(2 pi i / m)), i = 0..m-1.
MatrixXd uniform_polygon(int m);

// max(E y); <= 0 means y lies in the configuration cone.
double check_configuration(const ConfiguredTemplate& t, const VectorXd& y);

// {V^k y}. Throws kConfigurationViolated if E y exceeds tol.
VPolytope vertices_at(const ConfiguredTemplate& t, const VectorXd& y, double tol = 1e-7);

}  // namespace pdrci
