#pragma once

// Sampling-based checks of synthesized PD-RCI sets, computed from the raw model data.

#include <cstdint>
#include <vector>

#include "pdrci/synthesis.hpp"

namespace pdrci {

struct VerificationReport {
  double max_invariance_residual = 0.0;
  double max_config_residual = 0.0;
  double max_state_residual = 0.0;
  double max_input_residual = 0.0;
  int parameter_pairs = 0;
  int disturbance_vertices = 0;
  double tol = 1e-6;
  bool invariance_pass = false;
  bool config_pass = false;
  bool state_pass = false;
  bool input_pass = false;

  bool pass() const { return invariance_pass && config_pass && state_pass && input_pass; }
};

// Checks, at every vertex x^k(p) = V^k (y0 + Y p) with u^k(p) = u0^k + U^k p,
//   C (A(p) x^k + B(p) u^k + w) <= y0 + Y p+,  H^x x^k <= h^x,  H^u u^k <= h^u,
// and E (y0 + Y p) <= 0, over every vertex w of W. The pairs (p, p+) are the vertices of P
// paired with themselves followed by n_samples random pairs from the parameter samplers.
VerificationReport verify_solution(const PdRciSolution& sol, const ConfiguredTemplate& tmpl,
                                   const LpvProblem& problem, int n_samples = 1000, std::uint64_t seed = 1,
                                   double tol = 1e-6);

// Sum over the listed parameters of d_X(S(p)) with distance template D.
double dtot(const PdRciSolution& sol, const ConfiguredTemplate& tmpl, const LpvProblem& problem,
            const std::vector<VectorXd>& params, const MatrixXd& d);

// Inner hull estimate of the union of S(p) over P: hull of V^k (y0 + Y p) over the vertices
// of P and the first n_params points of a Halton sequence in P (nested in n_params).
VPolytope union_set_estimate(const PdRciSolution& sol, const ConfiguredTemplate& tmpl, const LpvProblem& problem,
                             int n_params);

// y_tilde_i = min over P of (y0 + Y p)_i, row by row.
VectorXd intersection_offsets(const VectorXd& y0, const MatrixXd& Y, const HPolytope& p);

// Largest gap, over n_dirs random unit directions, between the support values of {C x <= y_tilde}
// and of the intersection of S(p) over the vertices of P and n_params sampled parameters.
double check_intersection_support(const MatrixXd& c, const VectorXd& y0, const MatrixXd& Y, const LpvProblem& problem,
                   int n_dirs = 50, int n_params = 50, std::uint64_t seed = 1);

}  // namespace pdrci
