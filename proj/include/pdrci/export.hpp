#pragma once

// Planar boundary loops of S(p) for external plotting.

#include <array>
#include <string>
#include <vector>

#include "pdrci/synthesis.hpp"

namespace pdrci {

enum class SliceMode { kProjection, kSlice };

struct SliceSpec {
  std::array<int, 2> plane{0, 1};
  SliceMode mode = SliceMode::kProjection;
  VectorXd fixed;  // values of the remaining coordinates in slice mode, in increasing index order
};

// Counterclockwise boundary of the projection (or slice) of {x : C x <= y} onto the plane,
// closed by repeating the first vertex. Throws kDegenerateSlice when the result is not a polygon.
std::vector<Eigen::Vector2d> boundary_loop(const ConfiguredTemplate& tmpl, const VectorXd& y, const SliceSpec& spec);

// Columns param_index, p..., vertex, a, b, one closed loop per parameter.
std::string slices_csv(const PdRciSolution& sol, const ConfiguredTemplate& tmpl, const std::vector<VectorXd>& params,
                       const SliceSpec& spec);

}  // namespace pdrci
