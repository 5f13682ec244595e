#include "pdrci/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pdrci/linprog.hpp"

namespace pdrci {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  for (int i = index; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

int nth_prime(int k) {
  int count = 0;
  for (int c = 2;; ++c) {
    bool prime = true;
    for (int d = 2; d * d <= c && prime; ++d) prime = c % d != 0;
    if (prime && count++ == k) return c;
  }
}

// First n points of the Halton sequence mapped onto the bounding box of P, kept if inside P.
std::vector<VectorXd> halton_params(const LpvProblem& problem, int n) {
  const StepSampler& s = problem.sampler();
  const int dim = static_cast<int>(s.p_basis.cols());
  std::vector<VectorXd> out;
  for (int i = 1; i <= n; ++i) {
    VectorXd z(dim);
    for (int j = 0; j < dim; ++j) z(j) = s.p_lo(j) + halton(i, nth_prime(j)) * (s.p_hi(j) - s.p_lo(j));
    const VectorXd p = s.p_offset + s.p_basis * z;
    if (contains(problem.P(), p, 1e-9)) out.push_back(p);
  }
  return out;
}

}  // namespace

VerificationReport verify_solution(const PdRciSolution& sol, const ConfiguredTemplate& tmpl,
                                   const LpvProblem& problem, int n_samples, std::uint64_t seed, double tol) {
  const LpvSystem& sys = problem.sys();
  if (sol.y0.size() != tmpl.ms() || sol.Y.rows() != tmpl.ms() || sol.Y.cols() != sys.s() ||
      static_cast<int>(sol.u0.size()) != tmpl.N() || static_cast<int>(sol.U.size()) != tmpl.N()) {
    throw Error(ErrorCode::kShapeMismatch, "verify_solution: solution does not match the template");
  }
  std::vector<std::pair<VectorXd, VectorXd>> pairs;
  for (const auto& p : problem.vertices_P().vertices) pairs.emplace_back(p, p);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n_samples; ++i) {
    VectorXd p = sample_parameter(problem, rng);
    VectorXd next = sample_parameter_step(p, problem, rng);
    pairs.emplace_back(std::move(p), std::move(next));
  }
  const auto& wv = problem.vertices_W().vertices;

  VerificationReport rep;
  rep.tol = tol;
  rep.parameter_pairs = static_cast<int>(pairs.size());
  rep.disturbance_vertices = static_cast<int>(wv.size());
  rep.max_invariance_residual = rep.max_config_residual = rep.max_state_residual = rep.max_input_residual = kNegInf;
  for (const auto& [p, next] : pairs) {
    const VectorXd y = sol.y0 + sol.Y * p;
    const VectorXd y_next = sol.y0 + sol.Y * next;
    if (tmpl.E.rows() > 0) {
      rep.max_config_residual = std::max({rep.max_config_residual, (tmpl.E * y).maxCoeff(), (tmpl.E * y_next).maxCoeff()});
    }
    MatrixXd a = MatrixXd::Zero(sys.n(), sys.n()), b = MatrixXd::Zero(sys.n(), sys.m());
    for (int j = 0; j < sys.s(); ++j) {
      a += p(j) * sys.A()[j];
      b += p(j) * sys.B()[j];
    }
    for (int k = 0; k < tmpl.N(); ++k) {
      const VectorXd x = tmpl.V[k] * y;
      const VectorXd u = sol.u0[k] + sol.U[k] * p;
      rep.max_state_residual = std::max(rep.max_state_residual, (problem.X().A() * x - problem.X().b()).maxCoeff());
      rep.max_input_residual = std::max(rep.max_input_residual, (problem.U().A() * u - problem.U().b()).maxCoeff());
      const VectorXd drift = tmpl.C * (a * x + b * u) - y_next;
      for (const auto& w : wv) {
        rep.max_invariance_residual = std::max(rep.max_invariance_residual, (drift + tmpl.C * w).maxCoeff());
      }
    }
  }
  if (tmpl.E.rows() == 0) rep.max_config_residual = 0.0;
  rep.invariance_pass = rep.max_invariance_residual <= tol;
  rep.config_pass = rep.max_config_residual <= tol;
  rep.state_pass = rep.max_state_residual <= tol;
  rep.input_pass = rep.max_input_residual <= tol;
  return rep;
}

double dtot(const PdRciSolution& sol, const ConfiguredTemplate& tmpl, const LpvProblem& problem,
            const std::vector<VectorXd>& params, const MatrixXd& d) {
  const VPolytope xv = enumerate_vertices(problem.X());
  double total = 0.0;
  for (const auto& p : params) total += distance_metric(HPolytope(tmpl.C, sol.y0 + sol.Y * p), xv, d);
  return total;
}

VPolytope union_set_estimate(const PdRciSolution& sol, const ConfiguredTemplate& tmpl, const LpvProblem& problem,
                             int n_params) {
  std::vector<VectorXd> params = problem.vertices_P().vertices;
  for (auto& p : halton_params(problem, n_params)) params.push_back(std::move(p));
  std::vector<VectorXd> points;
  for (const auto& p : params) {
    const VectorXd y = sol.y0 + sol.Y * p;
    for (int k = 0; k < tmpl.N(); ++k) points.push_back(tmpl.V[k] * y);
  }
  return hull_vertices(points);
}

VectorXd intersection_offsets(const VectorXd& y0, const MatrixXd& Y, const HPolytope& p) {
  VectorXd out(y0.size());
  for (int i = 0; i < y0.size(); ++i) out(i) = y0(i) - support_value(p, -Y.row(i).transpose());
  return out;
}

double check_intersection_support(const MatrixXd& c, const VectorXd& y0, const MatrixXd& Y, const LpvProblem& problem,
                   int n_dirs, int n_params, std::uint64_t seed) {
  const VectorXd y_tilde = intersection_offsets(y0, Y, problem.P());
  std::vector<VectorXd> params = problem.vertices_P().vertices;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n_params; ++i) params.push_back(sample_parameter(problem, rng));
  const int ms = static_cast<int>(c.rows());
  MatrixXd stacked(ms * params.size(), c.cols());
  VectorXd offsets(ms * params.size());
  for (size_t j = 0; j < params.size(); ++j) {
    stacked.middleRows(j * ms, ms) = c;
    offsets.segment(j * ms, ms) = y0 + Y * params[j];
  }
  const HPolytope reduced(c, y_tilde);
  const HPolytope intersection(stacked, offsets);
  std::normal_distribution<double> gauss;
  double gap = 0.0;
  for (int i = 0; i < n_dirs; ++i) {
    VectorXd dir(c.cols());
    for (int j = 0; j < dir.size(); ++j) dir(j) = gauss(rng);
    dir.normalize();
    gap = std::max(gap, std::abs(support_value(reduced, dir) - support_value(intersection, dir)));
  }
  return gap;
}

}  // namespace pdrci
