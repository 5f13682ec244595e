#include "pdrci/config_template.hpp"

#include <cmath>
#include <numbers>
#include <optional>

namespace pdrci {

namespace {

// V with columns J holding C_J^{-1}; nullopt when C_J is ill-conditioned.
std::optional<MatrixXd> vertex_map(const MatrixXd& c, const std::vector<int>& j, double rank_tol) {
  const int n = static_cast<int>(c.cols());
  MatrixXd cj(n, n);
  for (int r = 0; r < n; ++r) cj.row(r) = c.row(j[r]);
  Eigen::JacobiSVD<MatrixXd> svd(cj);
  const VectorXd sv = svd.singularValues();
  if (sv(n - 1) <= rank_tol * sv(0)) return std::nullopt;
  const MatrixXd inv = cj.inverse();
  MatrixXd vk = MatrixXd::Zero(n, c.rows());
  for (int r = 0; r < n; ++r) vk.col(j[r]) = inv.col(r);
  return vk;
}

// All n-subsets of the given rows, lexicographic.
std::vector<std::vector<int>> subsets(const std::vector<int>& rows, int n) {
  std::vector<std::vector<int>> out;
  const int m = static_cast<int>(rows.size());
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  while (true) {
    std::vector<int> s(n);
    for (int i = 0; i < n; ++i) s[i] = rows[idx[i]];
    out.push_back(std::move(s));
    int i = n - 1;
    while (i >= 0 && idx[i] == m - n + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int k = i + 1; k < n; ++k) idx[k] = idx[k - 1] + 1;
  }
  return out;
}

}  // namespace

ConfiguredTemplate build_template(const MatrixXd& c, const VectorXd& sigma, const TemplateOptions& opts) {
  const Tolerances& tol = opts.tol;
  tol.validate();
  if (c.rows() != sigma.size()) {
    throw Error(ErrorCode::kShapeMismatch, "build_template: C has " + std::to_string(c.rows()) +
                                               " rows but sigma has " + std::to_string(sigma.size()));
  }
  const HPolytope seed = HPolytope(c, sigma).normalized();
  const int n = seed.dim();
  const int ms = seed.rows();

  EnumerationOptions eopts;
  eopts.tol = tol;
  eopts.check_bounded = false;
  if (is_empty(seed)) throw Error(ErrorCode::kInfeasible, "build_template: seed polytope is empty");
  if (!is_bounded(seed)) throw Error(ErrorCode::kUnboundedSeed, "build_template: seed polytope is unbounded");
  const EnumerationReport rep = enumerate_vertices_report(seed, eopts);
  if (!rep.simple && !opts.allow_nonsimple) {
    throw Error(ErrorCode::kNonSimpleSeed, "build_template: seed vertex " + std::to_string(*rep.first_degenerate) +
                                               " has more than " + std::to_string(n) + " active rows");
  }

  ConfiguredTemplate t;
  t.C = seed.A();
  t.seed_sigma = seed.b();
  t.active_sets = *rep.vertices.active_sets;
  const int nv = static_cast<int>(t.active_sets.size());
  std::vector<MatrixXd> blocks;
  const MatrixXd eye = MatrixXd::Identity(ms, ms);
  for (int k = 0; k < nv; ++k) {
    auto vk = vertex_map(t.C, t.active_sets[k], tol.rank_tol);
    if (!vk) {
      throw Error(ErrorCode::kSingularBlock, "build_template: active block of vertex " + std::to_string(k) +
                                                 " is ill-conditioned");
    }
    blocks.push_back(t.C * *vk - eye);
    t.V.push_back(std::move(*vk));
  }
  if (!rep.simple) {
    for (int k = 0; k < nv; ++k) {
      const VectorXd slack = t.seed_sigma - t.C * rep.vertices.vertices[k];
      std::vector<int> active;
      for (int i = 0; i < ms; ++i) {
        if (std::abs(slack(i)) <= tol.feas_tol) active.push_back(i);
      }
      if (static_cast<int>(active.size()) <= n) continue;
      for (const auto& j : subsets(active, n)) {
        if (j == t.active_sets[k]) continue;
        if (auto vj = vertex_map(t.C, j, tol.rank_tol)) blocks.push_back(t.C * *vj - eye);
      }
    }
  }
  t.E.resize(static_cast<Eigen::Index>(blocks.size()) * ms, ms);
  for (std::size_t b = 0; b < blocks.size(); ++b) t.E.middleRows(static_cast<Eigen::Index>(b) * ms, ms) = blocks[b];
  if (check_configuration(t, t.seed_sigma) > tol.feas_tol) {
    throw Error(ErrorCode::kConfigurationViolated, "build_template: seed outside its own configuration cone");
  }
  return t;
}

ConfiguredTemplate build_template(const MatrixXd& c, const TemplateOptions& opts) {
  return build_template(c, VectorXd::Ones(c.rows()), opts);
}

MatrixXd uniform_polygon(int m) {
  if (m < 3) throw Error(ErrorCode::kInvalidInput, "uniform_polygon: need at least 3 sides");
  MatrixXd c(m, 2);
  for (int i = 0; i < m; ++i) {
    const double a = 2.0 * std::numbers::pi * i / m;
    c(i, 0) = std::cos(a);
    c(i, 1) = std::sin(a);
  }
  return c;
}

double check_configuration(const ConfiguredTemplate& t, const VectorXd& y) {
  if (y.size() != t.ms()) throw Error(ErrorCode::kShapeMismatch, "check_configuration: offset size");
  return (t.E * y).maxCoeff();
}

VPolytope vertices_at(const ConfiguredTemplate& t, const VectorXd& y, double tol) {
  const double res = check_configuration(t, y);
  if (res > tol) {
    throw Error(ErrorCode::kConfigurationViolated,
                "vertices_at: configuration residual " + std::to_string(res) + " exceeds tolerance");
  }
  VPolytope out;
  out.vertices.reserve(t.V.size());
  for (const auto& vk : t.V) out.vertices.push_back(vk * y);
  out.active_sets = t.active_sets;
  return out;
}

}  // namespace pdrci
