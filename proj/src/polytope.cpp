#include "pdrci/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hull.hpp"
#include "pdrci/linprog.hpp"

namespace pdrci {

void Tolerances::validate() const {
  if (!(feas_tol > 0.0) || !(rank_tol > 0.0) || !(psd_tol > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "tolerances must be strictly positive");
  }
}

HPolytope::HPolytope(MatrixXd a, VectorXd b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != b_.size()) {
    throw Error(ErrorCode::kShapeMismatch, "HPolytope: A has " + std::to_string(a_.rows()) +
                                               " rows but b has " + std::to_string(b_.size()));
  }
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    if (a_.row(i).cwiseAbs().maxCoeff() <= 1e-12) {
      throw Error(ErrorCode::kShapeMismatch, "HPolytope: row " + std::to_string(i) + " is zero");
    }
  }
}

HPolytope HPolytope::box(const VectorXd& lower, const VectorXd& upper) {
  if (lower.size() != upper.size()) throw Error(ErrorCode::kShapeMismatch, "box bounds differ in size");
  const auto n = lower.size();
  MatrixXd a(2 * n, n);
  a << MatrixXd::Identity(n, n), -MatrixXd::Identity(n, n);
  VectorXd b(2 * n);
  b << upper, -lower;
  return HPolytope(a, b);
}

HPolytope HPolytope::symmetric_box(const VectorXd& bound) { return box(-bound, bound); }

HPolytope HPolytope::box_with_sum(const VectorXd& lower, const VectorXd& upper, double total) {
  HPolytope bx = box(lower, upper);
  const auto n = lower.size();
  MatrixXd a(2 * n + 2, n);
  a << bx.A(), VectorXd::Ones(n).transpose(), -VectorXd::Ones(n).transpose();
  VectorXd b(2 * n + 2);
  b << bx.b(), total, -total;
  return HPolytope(a, b);
}

HPolytope HPolytope::normalized() const {
  MatrixXd a = a_;
  VectorXd b = b_;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double nr = a.row(i).norm();
    a.row(i) /= nr;
    b(i) /= nr;
  }
  return HPolytope(a, b);
}

HPolytope HPolytope::scaled(double alpha) const {
  if (!(alpha > 0.0)) throw Error(ErrorCode::kInvalidInput, "scale factor must be positive");
  return HPolytope(a_, alpha * b_);
}

HPolytope HPolytope::linear_image(const MatrixXd& l) const {
  if (l.rows() != l.cols() || l.cols() != a_.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "linear_image expects a square map of matching size");
  }
  Eigen::FullPivLU<MatrixXd> lu(l);
  if (!lu.isInvertible()) throw Error(ErrorCode::kSingularW, "linear_image: map is singular");
  return HPolytope(a_ * lu.inverse(), b_);
}

HPolytope HPolytope::intersect(const HPolytope& other) const {
  if (other.dim() != dim()) throw Error(ErrorCode::kShapeMismatch, "intersect: dimension mismatch");
  MatrixXd a(rows() + other.rows(), dim());
  a << a_, other.a_;
  VectorXd b(rows() + other.rows());
  b << b_, other.b_;
  return HPolytope(a, b);
}

HPolytope HPolytope::cartesian(const HPolytope& other) const {
  MatrixXd a = MatrixXd::Zero(rows() + other.rows(), dim() + other.dim());
  a.topLeftCorner(rows(), dim()) = a_;
  a.bottomRightCorner(other.rows(), other.dim()) = other.a_;
  VectorXd b(rows() + other.rows());
  b << b_, other.b_;
  return HPolytope(a, b);
}

MatrixXd VPolytope::matrix() const {
  MatrixXd m(dim(), size());
  for (int i = 0; i < size(); ++i) m.col(i) = vertices[i];
  return m;
}

double support_value(const HPolytope& p, const VectorXd& c) {
  if (c.size() != p.dim()) throw Error(ErrorCode::kShapeMismatch, "support_value: direction size");
  const lp::Result r = lp::minimize(-c, p.A(), p.b());
  switch (r.status) {
    case lp::Status::kOptimal:
      return c.dot(r.x);
    case lp::Status::kUnbounded:
      throw Error(ErrorCode::kUnbounded, "support_value: unbounded in the given direction");
    case lp::Status::kInfeasible:
      throw Error(ErrorCode::kInfeasible, "support_value: polytope is empty");
    default:
      throw Error(ErrorCode::kSolverNumericalFailure, "support_value: LP failed");
  }
}

bool contains(const HPolytope& p, const VectorXd& x, double tol) {
  if (x.size() != p.dim()) throw Error(ErrorCode::kShapeMismatch, "contains: point size");
  return ((p.A() * x - p.b()).array() <= tol).all();
}

bool is_empty(const HPolytope& p) {
  const lp::Result r = lp::minimize(VectorXd::Zero(p.dim()), p.A(), p.b());
  if (r.status == lp::Status::kFailed) {
    throw Error(ErrorCode::kSolverNumericalFailure, "is_empty: LP failed");
  }
  return r.status == lp::Status::kInfeasible;
}

bool is_bounded(const HPolytope& p) {
  // Bounded iff rank(A) = dim and A' mu = 0 has a strictly positive solution.
  Eigen::FullPivLU<MatrixXd> lu(p.A());
  lu.setThreshold(1e-10);
  if (lu.rank() < p.dim()) return false;
  const int m = p.rows();
  // variables (mu, t): max t  s.t.  t - mu_i <= 0, sum(mu) <= 1, t <= 1, A' mu = 0
  VectorXd c = VectorXd::Zero(m + 1);
  c(m) = -1.0;
  MatrixXd g = MatrixXd::Zero(m + 2, m + 1);
  g.topLeftCorner(m, m) = -MatrixXd::Identity(m, m);
  g.col(m).head(m).setOnes();
  g.row(m).head(m).setOnes();
  g(m + 1, m) = 1.0;
  VectorXd h = VectorXd::Zero(m + 2);
  h(m) = 1.0;
  h(m + 1) = 1.0;
  MatrixXd aeq = MatrixXd::Zero(p.dim(), m + 1);
  for (int i = 0; i < m; ++i) aeq.col(i) = p.A().row(i).transpose().normalized();
  const lp::Result r = lp::minimize(c, g, h, aeq, VectorXd::Zero(p.dim()));
  if (r.status != lp::Status::kOptimal) {
    throw Error(ErrorCode::kSolverNumericalFailure, "is_bounded: LP failed");
  }
  return r.x(m) > 1e-9;
}

EnumerationReport enumerate_vertices_report(const HPolytope& p, const EnumerationOptions& options) {
  options.tol.validate();
  const int n = p.dim();
  const int m = p.rows();
  if (n < 1) throw Error(ErrorCode::kShapeMismatch, "enumerate_vertices: zero dimension");
  if (options.check_bounded) {
    if (is_empty(p)) throw Error(ErrorCode::kInfeasible, "enumerate_vertices: polytope is empty");
    if (!is_bounded(p)) throw Error(ErrorCode::kUnbounded, "enumerate_vertices: polytope is unbounded");
  }
  const HPolytope q = p.normalized();
  const MatrixXd& a = q.A();
  const VectorXd& b = q.b();
  const double feas = options.tol.feas_tol;

  EnumerationReport report;
  std::vector<std::vector<int>> active_sets;
  if (m < n) throw Error(ErrorCode::kUnbounded, "enumerate_vertices: fewer rows than dimension");

  // Lexicographic walk over n-subsets of rows.
  std::vector<int> subset(n);
  std::iota(subset.begin(), subset.end(), 0);
  MatrixXd sub(n, n);
  VectorXd rhs(n);
  while (true) {
    for (int i = 0; i < n; ++i) {
      sub.row(i) = a.row(subset[i]);
      rhs(i) = b(subset[i]);
    }
    Eigen::FullPivLU<MatrixXd> lu(sub);
    lu.setThreshold(options.tol.rank_tol);
    if (lu.isInvertible()) {
      const VectorXd x = lu.solve(rhs);
      if (((a * x - b).array() <= feas).all()) {
        bool dup = false;
        for (const auto& v : report.vertices.vertices) {
          if ((v - x).cwiseAbs().maxCoeff() <= options.merge_radius) {
            dup = true;
            break;
          }
        }
        if (!dup) {
          report.vertices.vertices.push_back(x);
          active_sets.push_back(subset);
        }
      }
    }
    int k = n - 1;
    while (k >= 0 && subset[k] == m - n + k) --k;
    if (k < 0) break;
    ++subset[k];
    for (int j = k + 1; j < n; ++j) subset[j] = subset[j - 1] + 1;
  }
  if (report.vertices.vertices.empty()) {
    throw Error(ErrorCode::kInfeasible, "enumerate_vertices: no vertex found");
  }
  for (int v = 0; v < report.vertices.size(); ++v) {
    const VectorXd slack = b - a * report.vertices.vertices[v];
    const int active = static_cast<int>((slack.array().abs() <= feas).count());
    if (active > n && report.simple) {
      report.simple = false;
      report.first_degenerate = v;
    }
  }
  report.vertices.active_sets = std::move(active_sets);
  if (options.require_simple && !report.simple) {
    throw Error(ErrorCode::kDegenerate,
                "enumerate_vertices: vertex " + std::to_string(*report.first_degenerate) +
                    " has more than " + std::to_string(n) + " active rows");
  }
  return report;
}

VPolytope enumerate_vertices(const HPolytope& p, const Tolerances& tol) {
  EnumerationOptions opts;
  opts.tol = tol;
  return enumerate_vertices_report(p, opts).vertices;
}

HPolytope hull_hrep(const std::vector<VectorXd>& points) {
  const detail::Hull hull = detail::quickhull(points);
  const int d = hull.dim;
  double scale = 1.0;
  for (const auto& p : points) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  // Merge coplanar simplicial facets.
  std::vector<VectorXd> normals;
  std::vector<double> offsets;
  for (const auto& f : hull.facets) {
    bool dup = false;
    for (std::size_t i = 0; i < normals.size(); ++i) {
      if ((normals[i] - f.normal).cwiseAbs().maxCoeff() <= 1e-9 &&
          std::abs(offsets[i] - f.offset) <= 1e-9 * scale) {
        dup = true;
        break;
      }
    }
    if (!dup) {
      normals.push_back(f.normal);
      offsets.push_back(f.offset);
    }
  }
  MatrixXd a(static_cast<Eigen::Index>(normals.size()), d);
  VectorXd b(static_cast<Eigen::Index>(normals.size()));
  for (std::size_t i = 0; i < normals.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) = normals[i].transpose();
    b(static_cast<Eigen::Index>(i)) = offsets[i];
  }
  return HPolytope(a, b);
}

VPolytope hull_vertices(const std::vector<VectorXd>& points) {
  const detail::Hull hull = detail::quickhull(points);
  VPolytope out;
  for (int i : hull.vertex_ids) out.vertices.push_back(points[i]);
  return out;
}

HPolytope project(const HPolytope& p, int keep) {
  if (keep < 1 || keep > p.dim()) throw Error(ErrorCode::kShapeMismatch, "project: bad coordinate count");
  const VPolytope v = enumerate_vertices(p);
  std::vector<VectorXd> pts;
  pts.reserve(v.vertices.size());
  for (const auto& x : v.vertices) pts.push_back(x.head(keep));
  return hull_hrep(pts);
}

HPolytope minimal_hrep(const HPolytope& p) {
  const HPolytope q = p.normalized();
  const VPolytope v = enumerate_vertices(q);
  const int n = q.dim();
  std::vector<int> keep;
  for (int i = 0; i < q.rows(); ++i) {
    std::vector<VectorXd> on;
    for (const auto& x : v.vertices) {
      if (std::abs(q.A().row(i).dot(x) - q.b()(i)) <= 1e-7) on.push_back(x);
    }
    if (static_cast<int>(on.size()) < n) continue;
    MatrixXd diffs(n, static_cast<Eigen::Index>(on.size()) - 1);
    for (std::size_t j = 1; j < on.size(); ++j) diffs.col(static_cast<Eigen::Index>(j) - 1) = on[j] - on[0];
    int rank = 0;
    if (diffs.cols() > 0) {
      Eigen::FullPivLU<MatrixXd> lu(diffs);
      lu.setThreshold(1e-9);
      rank = static_cast<int>(lu.rank());
    }
    if (rank < n - 1) continue;
    bool dup = false;
    for (int k : keep) {
      if ((q.A().row(k) - q.A().row(i)).cwiseAbs().maxCoeff() <= 1e-9 &&
          std::abs(q.b()(k) - q.b()(i)) <= 1e-9) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(i);
  }
  MatrixXd a(static_cast<Eigen::Index>(keep.size()), n);
  VectorXd b(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) = q.A().row(keep[i]);
    b(static_cast<Eigen::Index>(i)) = q.b()(keep[i]);
  }
  return HPolytope(a, b);
}

double volume(const VPolytope& v) {
  if (v.vertices.empty()) throw Error(ErrorCode::kDegenerate, "volume of an empty vertex list");
  const detail::Hull hull = detail::quickhull(v.vertices);
  const int d = hull.dim;
  VectorXd center = VectorXd::Zero(d);
  for (int i : hull.vertex_ids) center += v.vertices[i];
  center /= static_cast<double>(hull.vertex_ids.size());
  double factorial = 1.0;
  for (int i = 2; i <= d; ++i) factorial *= i;
  double total = 0.0;
  MatrixXd simplex(d, d);
  for (const auto& f : hull.facets) {
    for (int j = 0; j < d; ++j) simplex.col(j) = v.vertices[f.verts[j]] - center;
    total += std::abs(simplex.determinant());
  }
  return total / factorial;
}

DistanceResult distance_metric_detail(const HPolytope& z, const VPolytope& x_vertices,
                                      const MatrixXd& d) {
  const int n = z.dim();
  const int nt = x_vertices.size();
  const int mz = z.rows();
  const int md = static_cast<int>(d.rows());
  if (d.cols() != n || x_vertices.dim() != n) {
    throw Error(ErrorCode::kShapeMismatch, "distance_metric: dimension mismatch");
  }
  // variables: s^1..s^nt (n each), eps (md)
  const int nv = nt * n + md;
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> trip;
  const int rows = nt * (mz + md) + md;
  VectorXd h(rows);
  int r = 0;
  for (int t = 0; t < nt; ++t) {
    for (int i = 0; i < mz; ++i, ++r) {
      for (int j = 0; j < n; ++j) {
        if (z.A()(i, j) != 0.0) trip.emplace_back(r, t * n + j, z.A()(i, j));
      }
      h(r) = z.b()(i);
    }
    const VectorXd dx = d * x_vertices.vertices[t];
    for (int i = 0; i < md; ++i, ++r) {
      // D (x - s) <= eps
      for (int j = 0; j < n; ++j) {
        if (d(i, j) != 0.0) trip.emplace_back(r, t * n + j, -d(i, j));
      }
      trip.emplace_back(r, nt * n + i, -1.0);
      h(r) = -dx(i);
    }
  }
  for (int i = 0; i < md; ++i, ++r) {
    trip.emplace_back(r, nt * n + i, -1.0);
    h(r) = 0.0;
  }
  Eigen::SparseMatrix<double> g(rows, nv);
  g.setFromTriplets(trip.begin(), trip.end());
  VectorXd c = VectorXd::Zero(nv);
  c.tail(md).setOnes();
  const lp::Result res = lp::minimize(c, g, h, Eigen::SparseMatrix<double>(0, nv), VectorXd());
  if (res.status == lp::Status::kInfeasible || res.status == lp::Status::kUnbounded) {
    throw Error(ErrorCode::kInfeasible, "distance_metric: no Minkowski cover exists");
  }
  if (res.status != lp::Status::kOptimal) {
    throw Error(ErrorCode::kSolverNumericalFailure, "distance_metric: LP failed");
  }
  DistanceResult out;
  out.eps = res.x.tail(md).cwiseMax(0.0);
  out.value = out.eps.sum();
  return out;
}

double distance_metric(const HPolytope& z, const VPolytope& x_vertices, const MatrixXd& d) {
  return distance_metric_detail(z, x_vertices, d).value;
}

bool vertices_irredundant(const VPolytope& v, double tol) {
  const int k = v.size();
  const int n = v.dim();
  if (k <= 1) return true;
  const MatrixXd vm = v.matrix();
  for (int i = 0; i < k; ++i) {
    // min 1'(r+ + r-)  s.t.  sum_{j != i} lambda_j v_j + r+ - r- = v_i, sum lambda = 1, all >= 0
    const int nl = k - 1;
    const int nv = nl + 2 * n;
    MatrixXd aeq = MatrixXd::Zero(n + 1, nv);
    int col = 0;
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      aeq.block(0, col, n, 1) = vm.col(j);
      aeq(n, col) = 1.0;
      ++col;
    }
    aeq.block(0, nl, n, n) = MatrixXd::Identity(n, n);
    aeq.block(0, nl + n, n, n) = -MatrixXd::Identity(n, n);
    VectorXd beq(n + 1);
    beq << vm.col(i), 1.0;
    VectorXd c = VectorXd::Zero(nv);
    c.tail(2 * n).setOnes();
    const lp::Result r = lp::minimize(c, -MatrixXd::Identity(nv, nv), VectorXd::Zero(nv), aeq, beq);
    if (r.status != lp::Status::kOptimal) {
      throw Error(ErrorCode::kSolverNumericalFailure, "vertices_irredundant: LP failed");
    }
    if (r.value <= tol) return false;
  }
  return true;
}

}  // namespace pdrci
