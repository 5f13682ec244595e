#pragma once

// Parameter-dependent vertex control law and closed-loop simulation.

#include <random>
#include <string>
#include <vector>

#include "pdrci/synthesis.hpp"

namespace pdrci {

struct ControllerState {
  PdRciSolution solution;
  ConfiguredTemplate tmpl;
  LpvProblem problem;
};

// min ||lambda||^2 s.t. A lambda = b, lambda >= 0, by a primal active-set method started from
// an LP vertex. Throws kQpInfeasible when the constraints have no solution.
VectorXd min_norm_simplex_qp(const MatrixXd& a, const VectorXd& b, double tol = 1e-10);

struct ControlResult {
  VectorXd u;
  VectorXd lambda;
  double membership = 0.0;  // max(C x - y0 - Y p)
};

// Membership tolerance on row residuals.
inline constexpr double kMembershipTol = 1e-6;

// u = sum_k lambda_k (u0^k + U^k p) with lambda the minimum-norm convex weights of x over the
// vertices x^k(p). Throws kOutsideSet when C x > y0 + Y p + kMembershipTol.
ControlResult control_detail(const VectorXd& x, const VectorXd& p, const ControllerState& ctrl);
VectorXd control(const VectorXd& x, const VectorXd& p, const ControllerState& ctrl);

enum class DisturbanceMode { kVertices, kInterior };

struct Violation {
  int t = 0;
  std::string kind;  // "membership" or "input"
  int row = 0;
  double residual = 0.0;
};

struct Trajectory {
  std::vector<VectorXd> states;        // T + 1 entries
  std::vector<VectorXd> inputs;        // T entries
  std::vector<VectorXd> params;        // T + 1 entries
  std::vector<VectorXd> disturbances;  // T entries
  std::vector<double> max_residual;    // membership residual of each state, T + 1 entries
  std::vector<Violation> violations;   // the run stops at the first violating step

  int steps() const { return static_cast<int>(inputs.size()); }
};

struct SimulationOptions {
  DisturbanceMode disturbance = DisturbanceMode::kVertices;
  double input_tol = 1e-7;
};

// Closed loop x+ = A(p) x + B(p) u + w with w drawn from the vertices of W (or as a random
// convex combination of them) and p+ = sample_parameter_step(p).
Trajectory simulate(const ControllerState& ctrl, const VectorXd& x0, const VectorXd& p0, int horizon,
                    std::mt19937_64& rng, const SimulationOptions& opts = {});

// Columns t, x..., u..., p..., w..., max_residual; the last row has empty u and w.
std::string trajectory_csv(const Trajectory& traj);

}  // namespace pdrci
