#include "pdrci/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pdrci {

std::vector<Eigen::Vector2d> boundary_loop(const ConfiguredTemplate& tmpl, const VectorXd& y, const SliceSpec& spec) {
  const int n = tmpl.n();
  const auto [a, b] = spec.plane;
  if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
    throw Error(ErrorCode::kShapeMismatch, "boundary_loop: plane must name two distinct state coordinates");
  }
  std::vector<VectorXd> points;
  if (spec.mode == SliceMode::kProjection) {
    for (const auto& v : vertices_at(tmpl, y).vertices) points.push_back(Eigen::Vector2d(v(a), v(b)));
  } else {
    if (spec.fixed.size() != n - 2) throw Error(ErrorCode::kShapeMismatch, "boundary_loop: need n - 2 fixed values");
    MatrixXd c2(tmpl.ms(), 2);
    c2 << tmpl.C.col(a), tmpl.C.col(b);
    VectorXd rhs = y;
    for (int i = 0, k = 0; i < n; ++i) {
      if (i != a && i != b) rhs -= tmpl.C.col(i) * spec.fixed(k++);
    }
    // Rows orthogonal to the plane only decide whether the plane meets the set.
    std::vector<int> keep;
    for (int i = 0; i < tmpl.ms(); ++i) {
      if (c2.row(i).norm() > 1e-12) {
        keep.push_back(i);
      } else if (rhs(i) < -1e-9) {
        throw Error(ErrorCode::kDegenerateSlice, "boundary_loop: the plane misses the set");
      }
    }
    MatrixXd c_keep(keep.size(), 2);
    VectorXd r_keep(keep.size());
    for (size_t i = 0; i < keep.size(); ++i) {
      c_keep.row(i) = c2.row(keep[i]);
      r_keep(i) = rhs(keep[i]);
    }
    const HPolytope slice(c_keep, r_keep);
    if (is_empty(slice)) throw Error(ErrorCode::kDegenerateSlice, "boundary_loop: the plane misses the set");
    points = enumerate_vertices(slice).vertices;
  }
  VPolytope hull;
  try {
    hull = hull_vertices(points);
  } catch (const Error&) {
    throw Error(ErrorCode::kDegenerateSlice, "boundary_loop: the section is not two-dimensional");
  }
  if (hull.size() < 3) throw Error(ErrorCode::kDegenerateSlice, "boundary_loop: the section is not two-dimensional");
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  for (const auto& v : hull.vertices) center += v / hull.size();
  std::vector<Eigen::Vector2d> loop;
  for (const auto& v : hull.vertices) loop.push_back(v);
  std::sort(loop.begin(), loop.end(), [&](const Eigen::Vector2d& l, const Eigen::Vector2d& r) {
    return std::atan2(l.y() - center.y(), l.x() - center.x()) < std::atan2(r.y() - center.y(), r.x() - center.x());
  });
  loop.push_back(loop.front());
  return loop;
}

std::string slices_csv(const PdRciSolution& sol, const ConfiguredTemplate& tmpl, const std::vector<VectorXd>& params,
                       const SliceSpec& spec) {
  std::ostringstream out;
  out << "param_index";
  const int s = static_cast<int>(sol.Y.cols());
  for (int i = 0; i < s; ++i) out << ",p" << i;
  out << ",vertex,x" << spec.plane[0] << ",x" << spec.plane[1] << "\n";
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (size_t j = 0; j < params.size(); ++j) {
    const auto loop = boundary_loop(tmpl, sol.y0 + sol.Y * params[j], spec);
    for (size_t k = 0; k < loop.size(); ++k) {
      out << j;
      for (int i = 0; i < s; ++i) out << ',' << num(params[j](i));
      out << ',' << k << ',' << num(loop[k].x()) << ',' << num(loop[k].y()) << "\n";
    }
  }
  return out.str();
}

}  // namespace pdrci
