#pragma once

// Dense convex polytopes in half-space and vertex form.

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "pdrci/errors.hpp"

namespace pdrci {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Tolerances {
  double feas_tol = 1e-8;
  double rank_tol = 1e-9;
  double psd_tol = 1e-7;

  void validate() const;
};

// {x : A x <= b}. Equalities are stored as pairs of opposite inequalities.
class HPolytope {
 public:
  HPolytope() = default;
  HPolytope(MatrixXd a, VectorXd b);

  static HPolytope box(const VectorXd& lower, const VectorXd& upper);
  // {x : |x_i| <= bound_i}
  static HPolytope symmetric_box(const VectorXd& bound);
  // {x : lower <= x <= upper, sum(x) = total}
  static HPolytope box_with_sum(const VectorXd& lower, const VectorXd& upper, double total);

  const MatrixXd& A() const { return a_; }
  const VectorXd& b() const { return b_; }
  int dim() const { return static_cast<int>(a_.cols()); }
  int rows() const { return static_cast<int>(a_.rows()); }

  // Rows scaled to unit Euclidean norm, offsets scaled alike.
  HPolytope normalized() const;
  // {alpha x : x in P} for alpha > 0.
  HPolytope scaled(double alpha) const;
  // {L x : x in P} for invertible square L.
  HPolytope linear_image(const MatrixXd& l) const;
  // Stacks the rows of both polytopes.
  HPolytope intersect(const HPolytope& other) const;
  // {(x, y) : x in P, y in other}
  HPolytope cartesian(const HPolytope& other) const;

 private:
  MatrixXd a_;
  VectorXd b_;
};

struct VPolytope {
  std::vector<VectorXd> vertices;
  // Row indices that are active at each vertex (one set per vertex).
  std::optional<std::vector<std::vector<int>>> active_sets;

  int dim() const { return vertices.empty() ? 0 : static_cast<int>(vertices.front().size()); }
  int size() const { return static_cast<int>(vertices.size()); }
  // Vertices as columns.
  MatrixXd matrix() const;
};

struct EnumerationOptions {
  Tolerances tol{};
  double merge_radius = 1e-7;
  // Throw kDegenerate when a vertex has more than dim active rows.
  bool require_simple = false;
  bool check_bounded = true;
};

struct EnumerationReport {
  VPolytope vertices;
  bool simple = true;
  // Index (into vertices) of the first non-simple vertex, if any.
  std::optional<int> first_degenerate;
};

// max c'x over P. Throws kUnbounded / kInfeasible.
double support_value(const HPolytope& p, const VectorXd& c);

// Exhaustive dim-subset vertex enumeration with active-set bookkeeping.
EnumerationReport enumerate_vertices_report(const HPolytope& p,
                                            const EnumerationOptions& options = {});
VPolytope enumerate_vertices(const HPolytope& p, const Tolerances& tol = {});

bool contains(const HPolytope& p, const VectorXd& x, double tol = 1e-8);
bool is_bounded(const HPolytope& p);
bool is_empty(const HPolytope& p);

// Convex hull of points as a minimal H-representation with unit-norm rows.
// Throws kDegenerate when the hull is not full-dimensional.
HPolytope hull_hrep(const std::vector<VectorXd>& points);
// Vertices of the convex hull (extreme points only).
VPolytope hull_vertices(const std::vector<VectorXd>& points);

// Projection onto the first `keep` coordinates.
HPolytope project(const HPolytope& p, int keep);

// Removes redundant rows (rows that do not support a facet).
HPolytope minimal_hrep(const HPolytope& p);

// Volume of the convex hull of the vertices (dim <= 4).
double volume(const VPolytope& v);

// min ||eps||_1 s.t. X subset Z (+) {x : D x <= eps}, eps >= 0, where X is
// given by its vertices. Throws kInfeasible if no cover exists.
struct DistanceResult {
  double value = 0.0;
  VectorXd eps;
};
DistanceResult distance_metric_detail(const HPolytope& z, const VPolytope& x_vertices,
                                      const MatrixXd& d);
double distance_metric(const HPolytope& z, const VPolytope& x_vertices, const MatrixXd& d);

// Irredundancy of a vertex list: no point is a convex combination of the others.
bool vertices_irredundant(const VPolytope& v, double tol = 1e-8);

}  // namespace pdrci
