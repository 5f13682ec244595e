#pragma once

// Semidefinite program for parameter-dependent RCI sets S(p) = {x : C x <= y0 + Y p}
// with vertex control laws u^k(p) = u0^k + U^k p.

#include <string>
#include <vector>

#include "pdrci/config_template.hpp"
#include "pdrci/conic_solver.hpp"
#include "pdrci/lpv_model.hpp"

namespace pdrci {

struct SynthesisSpec {
  LpvProblem problem;
  ConfiguredTemplate tmpl;
  MatrixXd D;                          // distance template (m_d x n)
  std::vector<VectorXd> sampled_params;  // objective samples p^j in P
  VPolytope X_vertices;
  bool fix_Y_zero = false;             // quasi-LPV mode: Y = 0, y_inner = y0, Y_inner = 0
  conic::Settings options{};
};

// Defaults: D = C, samples = vertices of P, X vertices enumerated.
SynthesisSpec make_synthesis_spec(const LpvProblem& problem, const ConfiguredTemplate& tmpl,
                                  const MatrixXd& d = MatrixXd());

struct Multipliers {
  std::vector<MatrixXd> Lambda;  // per vertex, m_x x m_p
  std::vector<MatrixXd> M;       // per vertex, m_u x m_p
  MatrixXd Q;                    // m_s x (2 m_p + m_delta)
  std::vector<MatrixXd> Gamma;   // index k * m_s + i, m_p x m_p
};

struct SolveStats {
  double objective = 0.0;
  double solve_time = 0.0;
  std::string solver_status;
  int iterations = 0;
};

struct PdRciSolution {
  VectorXd y0;
  MatrixXd Y;
  VectorXd y_inner;
  MatrixXd Y_inner;
  std::vector<VectorXd> u0;
  std::vector<MatrixXd> U;
  std::vector<VectorXd> eps;
  VectorXd d;
  Multipliers multipliers;
  SolveStats stats;
};

// d_i = max_{w in W} C_i w.
VectorXd tightening_vector(const ConfiguredTemplate& t, const HPolytope& w);

// M^{ik} = (I_s kron C_i) [Abar V^k, Bbar], an s x (m_s + m) matrix.
MatrixXd build_M_ik(const ConfiguredTemplate& t, const LpvSystem& sys, int i, int k);

// Symmetric (s+1) x (s+1) matrix whose form (1/2)[p;1]' F [p;1] equals
// y_inner_i + Y_inner_i p - d_i - C_i (A(p) x^k(p) + B(p) u^k(p)).
MatrixXd build_F(const VectorXd& y0, const MatrixXd& Y, const VectorXd& u0k, const MatrixXd& Uk,
                 const VectorXd& y_inner, const MatrixXd& Y_inner, const MatrixXd& M_ik, double d_i, int i);

// [Hp' G Hp, -Hp' G hp; *, hp' G hp]. Throws kInvalidMultiplier when Gamma is not
// symmetric, nonnegative, zero-diagonal within 1e-9.
MatrixXd build_G(const MatrixXd& gamma, const MatrixXd& hp_mat, const VectorXd& hp);

// T with [p; 1] = T [z; 1] on the affine hull of P. The LMIs are imposed as
// T'(F - G(Gamma))T >= 0, where products with equality rows of P vanish.
MatrixXd parameter_hull_map(const LpvProblem& problem);

// Solves the synthesis SDP. Throws kSolverInfeasible (with the constraint groups carrying the
// infeasibility certificate) or kSolverNumericalFailure.
PdRciSolution synthesize(const SynthesisSpec& spec);
PdRciSolution synthesize_quasi_lpv(SynthesisSpec spec);

// Largest residuals of the solution against every constraint group of the program.
struct CertificateReport {
  double config = 0.0;          // max E y^j
  double state_ineq = 0.0;      // (b) inequality violation
  double state_eq = 0.0;        // (b) equality residual
  double input_ineq = 0.0;
  double input_eq = 0.0;
  double intersection_ineq = 0.0;
  double intersection_eq = 0.0;
  double multiplier_min = 0.0;  // most negative entry among Lambda, M, Q, Gamma
  double gamma_structure = 0.0; // max |Gamma - Gamma'| and |diag Gamma|
  double lmi_min_eig = 0.0;     // min eigenvalue over all T'(F - G(Gamma))T blocks
  double cover = 0.0;           // cover residual given eps

  // Pass with equality residuals <= eq_tol and lmi_min_eig >= -eq_tol.
  bool ok(double eq_tol = 1e-6) const;
};
CertificateReport replay_certificate(const PdRciSolution& sol, const SynthesisSpec& spec);

}  // namespace pdrci
