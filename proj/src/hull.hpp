#pragma once

#include <Eigen/Dense>

#include <vector>

namespace pdrci::detail {

struct HullFacet {
  std::vector<int> verts;  // sorted point indices, size dim
  Eigen::VectorXd normal;  // unit outward normal
  double offset = 0.0;     // normal' x <= offset on the hull
};

struct Hull {
  int dim = 0;
  std::vector<HullFacet> facets;
  std::vector<int> vertex_ids;  // sorted indices of extreme points
  Eigen::VectorXd interior;
};

// Simplicial quickhull. Throws Error(kDegenerate) for lower-dimensional input.
Hull quickhull(const std::vector<Eigen::VectorXd>& points);

}  // namespace pdrci::detail
