#include "pdrci/runtime.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include "pdrci/linprog.hpp"

namespace pdrci {

VectorXd min_norm_simplex_qp(const MatrixXd& a, const VectorXd& b, double tol) {
  const int nv = static_cast<int>(a.cols());
  if (a.rows() != b.size()) throw Error(ErrorCode::kShapeMismatch, "min_norm_simplex_qp: A and b disagree");
  const lp::Result start = lp::minimize(VectorXd::Zero(nv), -MatrixXd::Identity(nv, nv), VectorXd::Zero(nv), a, b);
  if (start.status != lp::Status::kOptimal) {
    throw Error(ErrorCode::kQpInfeasible, "min_norm_simplex_qp: no nonnegative solution of A lambda = b");
  }
  VectorXd lambda = start.x.cwiseMax(0.0);
  std::vector<bool> bound(nv);
  for (int i = 0; i < nv; ++i) bound[i] = lambda(i) <= tol;

  const int max_iter = 10 * nv + 100;
  for (int it = 0; it < max_iter; ++it) {
    std::vector<int> free;
    for (int i = 0; i < nv; ++i) {
      if (!bound[i]) free.push_back(i);
    }
    MatrixXd af(a.rows(), free.size());
    VectorXd lf(free.size());
    for (size_t j = 0; j < free.size(); ++j) {
      af.col(j) = a.col(free[j]);
      lf(j) = lambda(free[j]);
    }
    // Minimum-norm solution of A_F lambda_F = b is the equality-constrained optimum.
    const Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(af);
    const VectorXd target = free.empty() ? VectorXd() : VectorXd(cod.solve(b));
    const VectorXd step = free.empty() ? VectorXd() : VectorXd(target - lf);
    if (free.empty() || step.lpNorm<Eigen::Infinity>() <= tol) {
      // Multipliers of the bound constraints: mu_i = -a_i' nu with A_F' nu = 2 lambda_F.
      const VectorXd nu = free.empty() ? VectorXd::Zero(a.rows())
                                       : VectorXd(af.transpose().completeOrthogonalDecomposition().solve(2.0 * lf));
      int drop = -1;
      double worst = -tol;
      for (int i = 0; i < nv; ++i) {
        if (!bound[i]) continue;
        const double mu = -a.col(i).dot(nu);
        if (mu < worst) {
          worst = mu;
          drop = i;
        }
      }
      if (drop < 0) return lambda;
      bound[drop] = false;
      continue;
    }
    double alpha = 1.0;
    int block = -1;
    for (size_t j = 0; j < free.size(); ++j) {
      if (step(j) < 0.0) {
        const double ratio = -lf(j) / step(j);
        if (ratio < alpha) {
          alpha = ratio;
          block = free[j];
        }
      }
    }
    for (size_t j = 0; j < free.size(); ++j) lambda(free[j]) = std::max(0.0, lf(j) + alpha * step(j));
    if (block >= 0) {
      lambda(block) = 0.0;
      bound[block] = true;
    }
  }
  throw Error(ErrorCode::kQpInfeasible, "min_norm_simplex_qp: active-set iteration limit reached");
}

ControlResult control_detail(const VectorXd& x, const VectorXd& p, const ControllerState& ctrl) {
  const PdRciSolution& sol = ctrl.solution;
  const ConfiguredTemplate& t = ctrl.tmpl;
  if (x.size() != t.n() || p.size() != sol.Y.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "control: state or parameter dimension mismatch");
  }
  const VectorXd y = sol.y0 + sol.Y * p;
  ControlResult out;
  out.membership = (t.C * x - y).maxCoeff();
  if (out.membership > kMembershipTol) {
    throw Error(ErrorCode::kOutsideSet, "control: C x exceeds y0 + Y p by " + std::to_string(out.membership));
  }
  MatrixXd a(t.n() + 1, t.N());
  for (int k = 0; k < t.N(); ++k) {
    a.col(k).head(t.n()) = t.V[k] * y;
    a(t.n(), k) = 1.0;
  }
  VectorXd rhs(t.n() + 1);
  rhs << x, 1.0;
  out.lambda = min_norm_simplex_qp(a, rhs);
  out.u = VectorXd::Zero(ctrl.problem.sys().m());
  for (int k = 0; k < t.N(); ++k) out.u += out.lambda(k) * (sol.u0[k] + sol.U[k] * p);
  return out;
}

VectorXd control(const VectorXd& x, const VectorXd& p, const ControllerState& ctrl) {
  return control_detail(x, p, ctrl).u;
}

Trajectory simulate(const ControllerState& ctrl, const VectorXd& x0, const VectorXd& p0, int horizon,
                    std::mt19937_64& rng, const SimulationOptions& opts) {
  if (horizon < 0) throw Error(ErrorCode::kInvalidInput, "simulate: negative horizon");
  const LpvProblem& problem = ctrl.problem;
  const auto& wv = problem.vertices_W().vertices;
  const ConfiguredTemplate& t = ctrl.tmpl;
  auto membership = [&](const VectorXd& x, const VectorXd& p, int& row) {
    const VectorXd r = t.C * x - ctrl.solution.y0 - ctrl.solution.Y * p;
    return r.maxCoeff(&row);
  };

  Trajectory traj;
  VectorXd x = x0, p = p0;
  traj.states.push_back(x);
  traj.params.push_back(p);
  int row = 0;
  double res = membership(x, p, row);
  traj.max_residual.push_back(res);
  if (res > kMembershipTol) {
    traj.violations.push_back({0, "membership", row, res});
    return traj;
  }
  std::uniform_int_distribution<int> pick(0, static_cast<int>(wv.size()) - 1);
  std::exponential_distribution<double> expo(1.0);
  for (int step = 0; step < horizon; ++step) {
    const VectorXd u = control(x, p, ctrl);
    const VectorXd ures = problem.U().A() * u - problem.U().b();
    int urow = 0;
    const double umax = ures.maxCoeff(&urow);
    VectorXd w;
    if (opts.disturbance == DisturbanceMode::kVertices) {
      w = wv[pick(rng)];
    } else {
      VectorXd weights(wv.size());
      for (int i = 0; i < weights.size(); ++i) weights(i) = expo(rng);
      weights /= weights.sum();
      w = VectorXd::Zero(x.size());
      for (int i = 0; i < weights.size(); ++i) w += weights(i) * wv[i];
    }
    const auto [a, b] = evaluate_matrices(problem.sys(), p);
    x = a * x + b * u + w;
    p = sample_parameter_step(p, problem, rng);
    traj.inputs.push_back(u);
    traj.disturbances.push_back(w);
    traj.states.push_back(x);
    traj.params.push_back(p);
    res = membership(x, p, row);
    traj.max_residual.push_back(res);
    if (umax > opts.input_tol) {
      traj.violations.push_back({step, "input", urow, umax});
      break;
    }
    if (res > kMembershipTol) {
      traj.violations.push_back({step + 1, "membership", row, res});
      break;
    }
  }
  return traj;
}

std::string trajectory_csv(const Trajectory& traj) {
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
  const int m = traj.inputs.empty() ? 0 : static_cast<int>(traj.inputs[0].size());
  const int s = traj.params.empty() ? 0 : static_cast<int>(traj.params[0].size());
  const int nw = traj.disturbances.empty() ? n : static_cast<int>(traj.disturbances[0].size());
  std::ostringstream out;
  out << "t";
  for (int i = 0; i < n; ++i) out << ",x" << i;
  for (int i = 0; i < m; ++i) out << ",u" << i;
  for (int i = 0; i < s; ++i) out << ",p" << i;
  for (int i = 0; i < nw; ++i) out << ",w" << i;
  out << ",max_residual\n";
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  for (size_t t = 0; t < traj.states.size(); ++t) {
    out << t;
    for (int i = 0; i < n; ++i) out << ',' << num(traj.states[t](i));
    for (int i = 0; i < m; ++i) out << ',' << (t < traj.inputs.size() ? num(traj.inputs[t](i)) : "");
    for (int i = 0; i < s; ++i) out << ',' << num(traj.params[t](i));
    for (int i = 0; i < nw; ++i) out << ',' << (t < traj.disturbances.size() ? num(traj.disturbances[t](i)) : "");
    out << ',' << num(traj.max_residual[t]) << '\n';
  }
  return out.str();
}

}  // namespace pdrci
