#include "pdrci/template_init.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdrci/linprog.hpp"

namespace pdrci {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

SpMat sparse(int rows, int cols, const std::vector<Trip>& trip) {
  SpMat a(rows, cols);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

double condition(const MatrixXd& w) {
  Eigen::JacobiSVD<MatrixXd> svd(w);
  const VectorXd sv = svd.singularValues();
  return sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
}

// max over W vertices of C_hat M w, per row.
VectorXd disturbance_margin(const MatrixXd& cm, const VPolytope& wv) {
  VectorXd out = VectorXd::Constant(cm.rows(), -std::numeric_limits<double>::infinity());
  for (const auto& w : wv.vertices) out = out.cwiseMax(cm * w);
  return out;
}

// Per-vertex LP: min t s.t. C_hat M (A_i W z + B_i u) + margin <= 1 + t, H^u u <= h^u.
VectorXd best_input(const MatrixXd& w, const MatrixXd& m, const VectorXd& z, const LpvProblem& problem,
                    const MatrixXd& c_hat, double& residual) {
  const LpvSystem& sys = problem.sys();
  const int nu = sys.m();
  const MatrixXd cm = c_hat * m;
  const VectorXd margin = disturbance_margin(cm, problem.vertices_W());
  const auto& pv = problem.vertices_P().vertices;
  const int ms = static_cast<int>(c_hat.rows());
  const int rows = static_cast<int>(pv.size()) * ms + problem.U().rows();
  MatrixXd a = MatrixXd::Zero(rows, nu + 1);
  VectorXd b(rows);
  int r = 0;
  for (const auto& p : pv) {
    const auto [ap, bp] = evaluate_matrices(sys, p);
    const VectorXd drift = cm * ap * w * z + margin;
    a.block(r, 0, ms, nu) = cm * bp;
    a.block(r, nu, ms, 1).setConstant(-1.0);
    b.segment(r, ms) = VectorXd::Ones(ms) - drift;
    r += ms;
  }
  a.block(r, 0, problem.U().rows(), nu) = problem.U().A();
  b.segment(r, problem.U().rows()) = problem.U().b();
  VectorXd c = VectorXd::Zero(nu + 1);
  c(nu) = 1.0;
  const lp::Result res = lp::minimize(c, a, b);
  if (res.status != lp::Status::kOptimal) {
    residual = std::numeric_limits<double>::infinity();
    return VectorXd::Zero(nu);
  }
  const VectorXd u = res.x.head(nu);
  // Report the residual of the returned input rather than the LP value.
  residual = -std::numeric_limits<double>::infinity();
  for (const auto& p : pv) {
    const auto [ap, bp] = evaluate_matrices(sys, p);
    residual = std::max(residual, (cm * (ap * w * z + bp * u) + margin).maxCoeff() - 1.0);
  }
  residual = std::max(residual, (problem.U().A() * u - problem.U().b()).maxCoeff());
  return u;
}

// Cover data of the distance objective: vertices x^t of X, points zeta^t of Z, and D.
struct Cover {
  const VPolytope* xv = nullptr;
  const std::vector<VectorXd>* zeta = nullptr;
  const MatrixXd* d = nullptr;
  double t_cap = 0.0;  // upper bound on the linearized worst residual
};

// One trust-region LP in the relative step W = w (I + Delta), with M = W^{-1} linearized as
// (I - Delta) w^{-1} and the inputs inside that bilinear term frozen at u0. Without a cover it
// minimizes the worst invariance residual t; with one it keeps t <= 0 and minimizes the cover distance.
bool linearized_step(const MatrixXd& w, const std::vector<VectorXd>& u0, double radius, const MatrixXd& c_hat,
                     const VPolytope& zv, const LpvProblem& problem, const Cover& cover, MatrixXd& w_out,
                     double& t_lin) {
  const LpvSystem& sys = problem.sys();
  const int n = sys.n(), nu = sys.m();
  const int ms = static_cast<int>(c_hat.rows());
  const int nz = zv.size();
  const int md = cover.d ? static_cast<int>(cover.d->rows()) : 0;
  const int uu = n * n, tt = uu + nz * nu, ee = tt + 1, nvar = ee + md;
  auto w_ = [n](int a, int b) { return b * n + a; };
  const MatrixXd m = w.inverse();
  const MatrixXd cm = c_hat * m;
  const MatrixXd& hx = problem.X().A();
  const MatrixXd& hu = problem.U().A();

  std::vector<Trip> trip;
  std::vector<double> rhs;
  auto row = [&](double b) {
    rhs.push_back(b);
    return static_cast<int>(rhs.size()) - 1;
  };
  // Row rr gains sum_ab coef(a, b) dW(a, b) with dW = w Delta.
  MatrixXd coef(n, n);
  auto emit = [&](int rr) {
    const MatrixXd rel = w.transpose() * coef;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (rel(a, b) != 0.0) trip.emplace_back(rr, w_(a, b), rel(a, b));
      }
    }
  };
  for (const auto& p : problem.vertices_P().vertices) {
    const auto [ap, bp] = evaluate_matrices(sys, p);
    const MatrixXd g = cm * ap;
    const MatrixXd k = cm * bp;
    for (int j = 0; j < nz; ++j) {
      const VectorXd& z = zv.vertices[j];
      const VectorXd base = ap * w * z + bp * u0[j];
      for (const auto& wl : problem.vertices_W().vertices) {
        const VectorXd v = m * (base + wl);  // C M x changes by -C M dW v
        const VectorXd fixed = cm * (ap * w * z + wl);
        for (int r = 0; r < ms; ++r) {
          const int rr = row(1.0 - fixed(r));
          coef = g.row(r).transpose() * z.transpose() - cm.row(r).transpose() * v.transpose();
          emit(rr);
          for (int q = 0; q < nu; ++q) {
            if (k(r, q) != 0.0) trip.emplace_back(rr, uu + j * nu + q, k(r, q));
          }
          trip.emplace_back(rr, tt, -1.0);
        }
      }
    }
  }
  for (int j = 0; j < nz; ++j) {
    const VectorXd& z = zv.vertices[j];
    const VectorXd slack = problem.X().b() - hx * w * z;
    for (int r = 0; r < hx.rows(); ++r) {
      coef = hx.row(r).transpose() * z.transpose();
      emit(row(slack(r)));
    }
    for (int r = 0; r < hu.rows(); ++r) {
      const int rr = row(problem.U().b()(r));
      for (int q = 0; q < nu; ++q) {
        if (hu(r, q) != 0.0) trip.emplace_back(rr, uu + j * nu + q, hu(r, q));
      }
    }
  }
  for (int e = 0; e < uu; ++e) {
    trip.emplace_back(row(radius), e, 1.0);
    trip.emplace_back(row(radius), e, -1.0);
  }
  VectorXd c = VectorXd::Zero(nvar);
  if (cover.d) {
    // D (x^t - (w + dW) zeta^t) <= eps
    const MatrixXd& d = *cover.d;
    for (int t = 0; t < cover.xv->size(); ++t) {
      const VectorXd& zt = (*cover.zeta)[t];
      const VectorXd gap = d * (cover.xv->vertices[t] - w * zt);
      for (int r = 0; r < md; ++r) {
        const int rr = row(-gap(r));
        coef = -d.row(r).transpose() * zt.transpose();
        emit(rr);
        trip.emplace_back(rr, ee + r, -1.0);
      }
    }
    for (int r = 0; r < md; ++r) trip.emplace_back(row(0.0), ee + r, -1.0);
    trip.emplace_back(row(cover.t_cap), tt, 1.0);
    c.tail(md).setOnes();
  } else {
    c(tt) = 1.0;
  }
  const lp::Result res = lp::minimize(c, sparse(static_cast<int>(rhs.size()), nvar, trip),
                                      Eigen::Map<const VectorXd>(rhs.data(), rhs.size()), SpMat(0, nvar), VectorXd());
  if (res.status != lp::Status::kOptimal) return false;
  MatrixXd delta(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) delta(a, b) = res.x(w_(a, b));
  }
  w_out = w + w * delta;
  t_lin = res.x(tt);
  return true;
}

}  // namespace

PiDistance pi_distance(const MatrixXd& w, const MatrixXd& c_hat, const VPolytope& x_vertices, const MatrixXd& d) {
  const int n = static_cast<int>(w.rows());
  const int ms = static_cast<int>(c_hat.rows());
  const int nt = x_vertices.size();
  const int md = static_cast<int>(d.rows());
  const int ee = nt * n, nvar = ee + md;
  std::vector<Trip> trip;
  std::vector<double> rhs;
  auto row = [&](double b) {
    rhs.push_back(b);
    return static_cast<int>(rhs.size()) - 1;
  };
  const MatrixXd dw = d * w;
  for (int t = 0; t < nt; ++t) {
    for (int r = 0; r < ms; ++r) {
      const int rr = row(1.0);
      for (int a = 0; a < n; ++a) trip.emplace_back(rr, t * n + a, c_hat(r, a));
    }
    const VectorXd dx = d * x_vertices.vertices[t];
    for (int r = 0; r < md; ++r) {
      const int rr = row(-dx(r));
      for (int a = 0; a < n; ++a) trip.emplace_back(rr, t * n + a, -dw(r, a));
      trip.emplace_back(rr, ee + r, -1.0);
    }
  }
  for (int r = 0; r < md; ++r) trip.emplace_back(row(0.0), ee + r, -1.0);
  VectorXd c = VectorXd::Zero(nvar);
  c.tail(md).setOnes();
  const lp::Result res = lp::minimize(c, sparse(static_cast<int>(rhs.size()), nvar, trip),
                                      Eigen::Map<const VectorXd>(rhs.data(), rhs.size()), SpMat(0, nvar), VectorXd());
  if (res.status != lp::Status::kOptimal) throw Error(ErrorCode::kInfeasible, "pi_distance: cover LP failed");
  PiDistance out;
  out.value = res.x.tail(md).sum();
  for (int t = 0; t < nt; ++t) out.zeta.push_back(res.x.segment(t * n, n));
  return out;
}

VertexInputs derive_vertex_inputs(const MatrixXd& w, const LpvProblem& problem, const MatrixXd& c_hat) {
  if (w.rows() != problem.sys().n() || w.cols() != w.rows() || c_hat.cols() != w.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "derive_vertex_inputs: W and C_hat must match the state dimension");
  }
  const MatrixXd m = w.inverse();
  const VPolytope zv = enumerate_vertices(HPolytope(c_hat, VectorXd::Ones(c_hat.rows())));
  VertexInputs out;
  out.residual = -std::numeric_limits<double>::infinity();
  for (const auto& z : zv.vertices) {
    double res = 0.0;
    out.u.push_back(best_input(w, m, z, problem, c_hat, res));
    out.residual = std::max(out.residual, res);
  }
  return out;
}

InitReplay replay_check(const MatrixXd& w, const MatrixXd& m, const std::vector<VectorXd>& u_vertices,
                        const LpvProblem& problem, const MatrixXd& c_hat) {
  const LpvSystem& sys = problem.sys();
  const int n = sys.n();
  if (w.rows() != n || w.cols() != n || m.rows() != n || m.cols() != n || c_hat.cols() != n) {
    throw Error(ErrorCode::kShapeMismatch, "replay_check: W, M and C_hat must match the state dimension");
  }
  const VPolytope zv = enumerate_vertices(HPolytope(c_hat, VectorXd::Ones(c_hat.rows())));
  if (static_cast<int>(u_vertices.size()) != zv.size()) {
    throw Error(ErrorCode::kShapeMismatch, "replay_check: one input per vertex of Z is required");
  }
  InitReplay rep;
  rep.invariance = rep.state = rep.input = -std::numeric_limits<double>::infinity();
  rep.inverse = (w * m - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  const MatrixXd cm = c_hat * m;
  const auto& pv = problem.vertices_P().vertices;
  const auto& wv = problem.vertices_W().vertices;
  for (int j = 0; j < zv.size(); ++j) {
    const VectorXd x = w * zv.vertices[j];
    const VectorXd& u = u_vertices[j];
    rep.state = std::max(rep.state, (problem.X().A() * x - problem.X().b()).maxCoeff());
    rep.input = std::max(rep.input, (problem.U().A() * u - problem.U().b()).maxCoeff());
    for (int i = 0; i < static_cast<int>(pv.size()); ++i) {
      const auto [ap, bp] = evaluate_matrices(sys, pv[i]);
      const VectorXd next = ap * x + bp * u;
      for (int l = 0; l < static_cast<int>(wv.size()); ++l) {
        const double v = (cm * (next + wv[l])).maxCoeff() - 1.0;
        if (v > rep.invariance) {
          rep.invariance = v;
          rep.worst_z = j;
          rep.worst_p = i;
          rep.worst_w = l;
        }
      }
    }
  }
  return rep;
}

PiRciResult init_template(const MatrixXd& c_hat, const LpvProblem& problem, const InitOptions& opts) {
  const int n = problem.sys().n();
  if (c_hat.cols() != n) throw Error(ErrorCode::kShapeMismatch, "init_template: C_hat must have n columns");
  const HPolytope z_set(c_hat, VectorXd::Ones(c_hat.rows()));
  if (is_empty(z_set) || !is_bounded(z_set)) {
    throw Error(ErrorCode::kInvalidInput, "init_template: {C_hat z <= 1} must be bounded and nonempty");
  }
  const MatrixXd d = opts.D.size() == 0 ? c_hat : opts.D;
  if (d.cols() != n) throw Error(ErrorCode::kShapeMismatch, "init_template: D must have n columns");

  PiRciResult out;
  out.z_vertices = enumerate_vertices(z_set);
  const VPolytope xv = enumerate_vertices(problem.X());

  // W0 = alpha I with the largest alpha keeping alpha Z inside X.
  auto inside = [&](double alpha) {
    for (const auto& z : out.z_vertices.vertices) {
      if (!contains(problem.X(), alpha * z, 0.0)) return false;
    }
    return true;
  };
  double lo = 0.0, hi = 1.0;
  while (inside(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw Error(ErrorCode::kInvalidInput, "init_template: X appears unbounded");
  }
  for (int it = 0; it < opts.bisection_steps; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  if (!(lo > 0.0)) throw Error(ErrorCode::kInfeasibleAtInit, "init_template: no positive scale fits Z inside X");
  MatrixXd w = lo * MatrixXd::Identity(n, n);

  VertexInputs inputs = derive_vertex_inputs(w, problem, c_hat);
  // W0 may admit no vertex inputs; trust-region LPs on the worst residual restore feasibility.
  double radius = 0.5;
  for (int k = 0; k < opts.restoration_steps && inputs.residual > -opts.restoration_margin; ++k) {
    MatrixXd w_new;
    bool accepted = false;
    while (!accepted && radius > 1e-9) {
      double t_lin = 0.0;
      if (linearized_step(w, inputs.u, radius, c_hat, out.z_vertices, problem, Cover{}, w_new, t_lin) &&
          condition(w_new) <= opts.cond_limit) {
        VertexInputs cand = derive_vertex_inputs(w_new, problem, c_hat);
        if (cand.residual < inputs.residual - 1e-12) {
          accepted = true;
          w = w_new;
          inputs = std::move(cand);
          radius *= 2.0;
          break;
        }
      }
      radius *= 0.5;
    }
    if (!accepted) break;
  }
  if (inputs.residual > opts.feas_tol) {
    const InitReplay rep = replay_check(w, w.inverse(), inputs.u, problem, c_hat);
    throw Error(ErrorCode::kInfeasibleAtInit,
                "init_template: no RCI vertex inputs from W0 = " + std::to_string(lo) + " I (residual " +
                    std::to_string(inputs.residual) + " at Z vertex " + std::to_string(rep.worst_z) +
                    ", P vertex " + std::to_string(rep.worst_p) + ", W vertex " + std::to_string(rep.worst_w) + ")");
  }
  PiDistance dist = pi_distance(w, c_hat, xv, d);
  out.history.push_back(dist.value);

  const Cover cover{&xv, nullptr, &d};
  radius = std::max(radius, 0.1);
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    Cover step_cover = cover;
    step_cover.zeta = &dist.zeta;
    bool accepted = false;
    double change = 0.0;
    while (!accepted && radius > opts.step_tol) {
      // A rejected step is retried at the same radius with the residual bound tightened
      // by the observed linearization error, then the radius shrinks.
      step_cover.t_cap = 0.0;
      for (int attempt = 0; attempt < 4 && !accepted; ++attempt) {
        MatrixXd w_new;
        double t_lin = 0.0;
        if (!linearized_step(w, inputs.u, radius, c_hat, out.z_vertices, problem, step_cover, w_new, t_lin) ||
            condition(w_new) > opts.cond_limit) {
          break;
        }
        VertexInputs cand = derive_vertex_inputs(w_new, problem, c_hat);
        if (cand.residual > opts.feas_tol) {
          step_cover.t_cap = std::min(step_cover.t_cap, t_lin - (cand.residual - t_lin));
          continue;
        }
        PiDistance cand_dist = pi_distance(w_new, c_hat, xv, d);
        if (cand_dist.value >= dist.value - 1e-9) break;
        accepted = true;
        change = (w_new - w).cwiseAbs().maxCoeff();
        w = std::move(w_new);
        inputs = std::move(cand);
        dist = std::move(cand_dist);
        out.history.push_back(dist.value);
      }
      radius *= accepted ? 2.0 : 0.5;
    }
    if (!accepted || change <= opts.step_tol) {
      out.converged = true;
      break;
    }
  }
  if (condition(w) > opts.cond_limit) throw Error(ErrorCode::kSingularW, "init_template: W is ill-conditioned");
  out.W = w;
  out.M = w.inverse();
  out.u_vertices = std::move(inputs.u);
  out.dist = dist.value;
  out.iterations = it;
  return out;
}

}  // namespace pdrci
