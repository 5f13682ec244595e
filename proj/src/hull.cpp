#include "hull.hpp"

#include <algorithm>
#include <map>

#include "pdrci/errors.hpp"

namespace pdrci::detail {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct WorkFacet {
  HullFacet f;
  std::vector<int> outside;
  bool alive = true;
};

bool make_plane(const std::vector<VectorXd>& pts, const std::vector<int>& verts,
                const VectorXd& interior, HullFacet& out) {
  const int d = static_cast<int>(interior.size());
  MatrixXd diffs(d - 1, d);
  for (int i = 1; i < d; ++i) diffs.row(i - 1) = (pts[verts[i]] - pts[verts[0]]).transpose();
  VectorXd normal;
  if (d == 1) {
    normal = VectorXd::Ones(1);
  } else {
    Eigen::JacobiSVD<MatrixXd> svd(diffs, Eigen::ComputeFullV);
    normal = svd.matrixV().col(d - 1);
  }
  const double nn = normal.norm();
  if (!(nn > 0.0)) return false;
  normal /= nn;
  double offset = normal.dot(pts[verts[0]]);
  if (normal.dot(interior) - offset > 0.0) {
    normal = -normal;
    offset = -offset;
  }
  out.verts = verts;
  std::sort(out.verts.begin(), out.verts.end());
  out.normal = normal;
  out.offset = offset;
  return true;
}

}  // namespace

Hull quickhull(const std::vector<VectorXd>& pts) {
  if (pts.empty()) throw Error(ErrorCode::kDegenerate, "convex hull of an empty point set");
  const int d = static_cast<int>(pts.front().size());
  const int n = static_cast<int>(pts.size());
  double scale = 1.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = 1e-10 * scale;

  Hull hull;
  hull.dim = d;

  if (d == 1) {
    int lo = 0, hi = 0;
    for (int i = 1; i < n; ++i) {
      if (pts[i](0) < pts[lo](0)) lo = i;
      if (pts[i](0) > pts[hi](0)) hi = i;
    }
    if (pts[hi](0) - pts[lo](0) <= eps) throw Error(ErrorCode::kDegenerate, "hull is a point");
    hull.interior = VectorXd::Constant(1, 0.5 * (pts[lo](0) + pts[hi](0)));
    hull.facets.push_back({{hi}, VectorXd::Ones(1), pts[hi](0)});
    hull.facets.push_back({{lo}, -VectorXd::Ones(1), -pts[lo](0)});
    hull.vertex_ids = {std::min(lo, hi), std::max(lo, hi)};
    return hull;
  }

  // Initial simplex: greedily maximize distance to the current affine hull.
  std::vector<int> simplex;
  {
    int first = 0;
    for (int i = 1; i < n; ++i) {
      if (pts[i](0) < pts[first](0)) first = i;
    }
    simplex.push_back(first);
    std::vector<VectorXd> basis;
    for (int k = 0; k < d; ++k) {
      double best = -1.0;
      int best_i = -1;
      for (int i = 0; i < n; ++i) {
        VectorXd r = pts[i] - pts[simplex[0]];
        for (const auto& q : basis) r -= q.dot(r) * q;
        const double dist = r.norm();
        if (dist > best) {
          best = dist;
          best_i = i;
        }
      }
      if (best <= 1e3 * eps) {
        throw Error(ErrorCode::kDegenerate, "points span an affine subspace of dimension " +
                                                std::to_string(k) + " < " + std::to_string(d));
      }
      VectorXd r = pts[best_i] - pts[simplex[0]];
      for (const auto& q : basis) r -= q.dot(r) * q;
      basis.push_back(r.normalized());
      simplex.push_back(best_i);
    }
  }
  VectorXd interior = VectorXd::Zero(d);
  for (int i : simplex) interior += pts[i];
  interior /= static_cast<double>(d + 1);
  hull.interior = interior;

  std::vector<WorkFacet> facets;
  for (int skip = 0; skip <= d; ++skip) {
    std::vector<int> verts;
    for (int i = 0; i <= d; ++i) {
      if (i != skip) verts.push_back(simplex[i]);
    }
    WorkFacet wf;
    if (!make_plane(pts, verts, interior, wf.f)) {
      throw Error(ErrorCode::kDegenerate, "degenerate initial simplex");
    }
    facets.push_back(std::move(wf));
  }
  std::vector<char> used(n, 0);
  for (int i : simplex) used[i] = 1;
  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    for (auto& wf : facets) {
      if (wf.f.normal.dot(pts[i]) - wf.f.offset > eps) {
        wf.outside.push_back(i);
        break;
      }
    }
  }

  while (true) {
    int fi = -1;
    for (int i = 0; i < static_cast<int>(facets.size()); ++i) {
      if (facets[i].alive && !facets[i].outside.empty()) {
        fi = i;
        break;
      }
    }
    if (fi < 0) break;
    // Farthest outside point of this facet.
    int apex = -1;
    double far = -1.0;
    for (int i : facets[fi].outside) {
      const double dist = facets[fi].f.normal.dot(pts[i]) - facets[fi].f.offset;
      if (dist > far) {
        far = dist;
        apex = i;
      }
    }
    std::vector<int> visible;
    for (int i = 0; i < static_cast<int>(facets.size()); ++i) {
      if (facets[i].alive && facets[i].f.normal.dot(pts[apex]) - facets[i].f.offset > eps) {
        visible.push_back(i);
      }
    }
    std::map<std::vector<int>, int> ridge_count;
    for (int i : visible) {
      const auto& verts = facets[i].f.verts;
      for (int skip = 0; skip < d; ++skip) {
        std::vector<int> ridge;
        for (int j = 0; j < d; ++j) {
          if (j != skip) ridge.push_back(verts[j]);
        }
        ++ridge_count[ridge];
      }
    }
    std::vector<int> orphans;
    for (int i : visible) {
      facets[i].alive = false;
      for (int q : facets[i].outside) {
        if (q != apex) orphans.push_back(q);
      }
      facets[i].outside.clear();
    }
    const std::size_t first_new = facets.size();
    for (const auto& [ridge, count] : ridge_count) {
      if (count != 1) continue;
      std::vector<int> verts = ridge;
      verts.push_back(apex);
      WorkFacet wf;
      if (!make_plane(pts, verts, interior, wf.f)) continue;
      facets.push_back(std::move(wf));
    }
    for (int q : orphans) {
      for (std::size_t i = first_new; i < facets.size(); ++i) {
        if (facets[i].f.normal.dot(pts[q]) - facets[i].f.offset > eps) {
          facets[i].outside.push_back(q);
          break;
        }
      }
    }
  }

  std::vector<char> is_vertex(n, 0);
  for (auto& wf : facets) {
    if (!wf.alive) continue;
    for (int v : wf.f.verts) is_vertex[v] = 1;
    hull.facets.push_back(std::move(wf.f));
  }
  for (int i = 0; i < n; ++i) {
    if (is_vertex[i]) hull.vertex_ids.push_back(i);
  }
  return hull;
}

}  // namespace pdrci::detail
