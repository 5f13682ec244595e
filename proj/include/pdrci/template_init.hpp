#pragma once

// Template matrices C = C_hat W^{-1} from a parameter-independent RCI set
// S_PI(W) = {x : C_hat W^{-1} x <= 1}. Starting from W0 = alpha I, trust-region linear programs
// first restore RCI feasibility and then decrease d_X(S_PI(W)) while keeping it.

#include <vector>

#include "pdrci/lpv_model.hpp"

namespace pdrci {

struct InitOptions {
  int max_iter = 100;
  double step_tol = 1e-7;     // stop when max |W_t - W_{t-1}| or the trust radius falls below this
  double feas_tol = 1e-8;     // acceptance tolerance of the RCI inequalities
  double cond_limit = 1e8;    // SingularW above this condition number
  int bisection_steps = 40;
  // Trust-region LPs run from W0 until the worst invariance residual is below -restoration_margin.
  int restoration_steps = 200;
  double restoration_margin = 1e-3;
  MatrixXd D;                 // distance template; empty means C_hat
};

struct PiRciResult {
  MatrixXd W, M;
  std::vector<VectorXd> u_vertices;  // one input per vertex of Z
  VPolytope z_vertices;              // vertices of Z = {C_hat z <= 1}
  double dist = 0.0;                 // d_X(S_PI(W)) with the chosen D
  std::vector<double> history;       // accepted objective values, nonincreasing
  int iterations = 0;
  bool converged = false;
};

// Largest residual of each constraint group of the NLP at (W, M, u).
struct InitReplay {
  double invariance = 0.0;  // max C_hat M (A(p) W z + B(p) u + w) - 1
  double state = 0.0;       // max H^x W z - h^x
  double input = 0.0;       // max H^u u - h^u
  double inverse = 0.0;     // max |W M - I|
  // Worst invariance row: vertex of Z, vertex of P, vertex of W.
  int worst_z = -1, worst_p = -1, worst_w = -1;

  bool ok(double tol = 1e-6) const {
    return invariance <= tol && state <= tol && input <= tol && inverse <= tol;
  }
};

PiRciResult init_template(const MatrixXd& c_hat, const LpvProblem& problem, const InitOptions& opts = {});

InitReplay replay_check(const MatrixXd& w, const MatrixXd& m, const std::vector<VectorXd>& u_vertices,
                        const LpvProblem& problem, const MatrixXd& c_hat);

// Vertex inputs for a given W (with M = W^{-1}) minimizing the worst invariance residual
// of each vertex separately. The returned residual is the largest of these minima.
struct VertexInputs {
  std::vector<VectorXd> u;
  double residual = 0.0;
};
VertexInputs derive_vertex_inputs(const MatrixXd& w, const LpvProblem& problem, const MatrixXd& c_hat);

// d_X(S_PI(W)) and, per vertex x^t of X, a point zeta^t in Z with s^t = W zeta^t.
struct PiDistance {
  double value = 0.0;
  std::vector<VectorXd> zeta;
};
PiDistance pi_distance(const MatrixXd& w, const MatrixXd& c_hat, const VPolytope& x_vertices, const MatrixXd& d);

}  // namespace pdrci
