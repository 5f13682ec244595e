#include "pdrci/lpv_model.hpp"

#include <iostream>

namespace pdrci {

namespace {

// Rows i < j with a_i = -a_j and b_i = -b_j after normalization; returns one row per pair.
void paired_equalities(const HPolytope& h, MatrixXd& f, VectorXd& g) {
  const HPolytope q = h.normalized();
  std::vector<int> rows;
  for (int i = 0; i < q.rows(); ++i) {
    for (int j = i + 1; j < q.rows(); ++j) {
      if ((q.A().row(i) + q.A().row(j)).cwiseAbs().maxCoeff() <= 1e-12 &&
          std::abs(q.b()(i) + q.b()(j)) <= 1e-12) {
        rows.push_back(i);
        break;
      }
    }
  }
  f.resize(static_cast<Eigen::Index>(rows.size()), q.dim());
  g.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    f.row(static_cast<Eigen::Index>(k)) = q.A().row(rows[k]);
    g(static_cast<Eigen::Index>(k)) = q.b()(rows[k]);
  }
}

MatrixXd null_space(const MatrixXd& f, int dim) {
  if (f.rows() == 0) return MatrixXd::Identity(dim, dim);
  Eigen::JacobiSVD<MatrixXd> svd(f, Eigen::ComputeFullV);
  const VectorXd sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-10 * std::max(1.0, sv(0))) ++rank;
  }
  return svd.matrixV().rightCols(dim - rank);
}

VectorXd min_norm_solve(const MatrixXd& f, const VectorXd& g, int dim) {
  if (f.rows() == 0) return VectorXd::Zero(dim);
  return f.completeOrthogonalDecomposition().solve(g);
}

void box_in_basis(const HPolytope& set, const MatrixXd& basis, VectorXd& lo, VectorXd& hi) {
  lo.resize(basis.cols());
  hi.resize(basis.cols());
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    hi(c) = support_value(set, basis.col(c));
    lo(c) = -support_value(set, -basis.col(c));
  }
}

void require_dim(const HPolytope& h, int dim, const char* name) {
  if (h.dim() != dim) {
    throw Error(ErrorCode::kShapeMismatch, std::string("LpvProblem: ") + name + " has dimension " +
                                               std::to_string(h.dim()) + ", expected " + std::to_string(dim));
  }
}

}  // namespace

LpvSystem::LpvSystem(std::vector<MatrixXd> a, std::vector<MatrixXd> b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.empty()) throw Error(ErrorCode::kShapeMismatch, "LpvSystem: need at least one parameter");
  if (a_.size() != b_.size()) throw Error(ErrorCode::kShapeMismatch, "LpvSystem: A and B lists differ in length");
  n_ = static_cast<int>(a_.front().rows());
  m_ = static_cast<int>(b_.front().cols());
  for (std::size_t j = 0; j < a_.size(); ++j) {
    if (a_[j].rows() != n_ || a_[j].cols() != n_) {
      throw Error(ErrorCode::kShapeMismatch, "LpvSystem: A^" + std::to_string(j) + " is not n x n");
    }
    if (b_[j].rows() != n_ || b_[j].cols() != m_) {
      throw Error(ErrorCode::kShapeMismatch, "LpvSystem: B^" + std::to_string(j) + " is not n x m");
    }
  }
}

std::pair<MatrixXd, MatrixXd> evaluate_matrices(const LpvSystem& sys, const VectorXd& p) {
  if (p.size() != sys.s()) throw Error(ErrorCode::kShapeMismatch, "evaluate_matrices: parameter size");
  MatrixXd a = MatrixXd::Zero(sys.n(), sys.n());
  MatrixXd b = MatrixXd::Zero(sys.n(), sys.m());
  for (int j = 0; j < sys.s(); ++j) {
    a += p(j) * sys.A()[j];
    b += p(j) * sys.B()[j];
  }
  return {a, b};
}

LpvProblem::LpvProblem(LpvData data) : data_(std::move(data)) {
  const LpvSystem& sys = data_.sys;
  require_dim(data_.X, sys.n(), "X");
  require_dim(data_.U, sys.m(), "U");
  require_dim(data_.W, sys.n(), "W");
  require_dim(data_.P, sys.s(), "P");
  require_dim(data_.R, sys.s(), "R");
  for (const auto* h : {&data_.W, &data_.P, &data_.R}) {
    if (is_empty(*h)) throw Error(ErrorCode::kInfeasible, "LpvProblem: W, P or R is empty");
    if (!is_bounded(*h)) throw Error(ErrorCode::kUnbounded, "LpvProblem: W, P or R is unbounded");
  }
  if (!contains(data_.R, VectorXd::Zero(sys.s()), 1e-9)) {
    throw Error(ErrorCode::kInvalidInput, "LpvProblem: the rate bound R must contain 0");
  }
  vertices_P_ = enumerate_vertices(data_.P);
  for (int j = 0; j < sys.s(); ++j) {
    for (const auto& v : vertices_P_.vertices) {
      if (v(j) < -1e-9) {
        throw Error(ErrorCode::kInvalidInput, "LpvProblem: parameter " + std::to_string(j) +
                                                  " takes negative values on P (use lift_nonnegative)");
      }
    }
  }
  vertices_W_ = enumerate_vertices(data_.W);

  StepSampler& smp = sampler_;
  paired_equalities(data_.P, smp.eq_P, smp.eq_P_rhs);
  paired_equalities(data_.R, smp.eq_R, smp.eq_R_rhs);
  MatrixXd f(smp.eq_P.rows() + smp.eq_R.rows(), sys.s());
  f << smp.eq_P, smp.eq_R;
  smp.null_basis = null_space(f, sys.s());
  box_in_basis(data_.R, smp.null_basis, smp.z_lo, smp.z_hi);
  smp.p_basis = null_space(smp.eq_P, sys.s());
  smp.p_offset = min_norm_solve(smp.eq_P, smp.eq_P_rhs, sys.s());
  box_in_basis(data_.P, smp.p_basis, smp.p_lo, smp.p_hi);
}

LpvProblem LpvProblem::with_rate_bound(const HPolytope& r) const {
  LpvData d = data_;
  d.R = r;
  return LpvProblem(std::move(d));
}

LiftedProblem lift_nonnegative(const LpvData& data) {
  const LpvSystem& sys = data.sys;
  const int s = sys.s();
  VectorXd shift = VectorXd::Zero(s);
  for (const auto& v : enumerate_vertices(data.P).vertices) shift = shift.cwiseMax(-v);
  std::vector<MatrixXd> a{MatrixXd::Zero(sys.n(), sys.n())}, b{MatrixXd::Zero(sys.n(), sys.m())};
  for (int j = 0; j < s; ++j) {
    a.front() -= shift(j) * sys.A()[j];
    b.front() -= shift(j) * sys.B()[j];
    a.push_back(sys.A()[j]);
    b.push_back(sys.B()[j]);
  }
  auto lift_set = [s](const HPolytope& h, double constant, const VectorXd& offset) {
    MatrixXd a2 = MatrixXd::Zero(h.rows() + 2, s + 1);
    VectorXd b2(h.rows() + 2);
    a2(0, 0) = 1.0;
    a2(1, 0) = -1.0;
    b2(0) = constant;
    b2(1) = -constant;
    a2.bottomRightCorner(h.rows(), s) = h.A();
    b2.tail(h.rows()) = h.b() + h.A() * offset;
    return HPolytope(a2, b2);
  };
  LpvData lifted{LpvSystem(a, b), data.X, data.U, data.W, lift_set(data.P, 1.0, shift),
                 lift_set(data.R, 0.0, VectorXd::Zero(s))};
  return {LpvProblem(std::move(lifted)), shift};
}

VectorXd lift_parameter(const VectorXd& p_hat, const VectorXd& shift) {
  VectorXd p(p_hat.size() + 1);
  p << 1.0, shift + p_hat;
  return p;
}

PPlusData build_pplus(const HPolytope& p, const HPolytope& r) {
  if (p.dim() != r.dim()) throw Error(ErrorCode::kShapeMismatch, "build_pplus: P and R dimensions differ");
  const int s = p.dim();
  const int mp = p.rows();
  const int md = r.rows();
  PPlusData out;
  out.H_pdelta = MatrixXd::Zero(2 * mp + md, 2 * s);
  out.H_pdelta.topLeftCorner(mp, s) = p.A();
  out.H_pdelta.block(mp, s, md, s) = r.A();
  out.H_pdelta.block(mp + md, 0, mp, s) = p.A();
  out.H_pdelta.block(mp + md, s, mp, s) = p.A();
  out.h_pdelta.resize(2 * mp + md);
  out.h_pdelta << p.b(), r.b(), p.b();
  return out;
}

VectorXd sample_parameter_step(const VectorXd& p, const LpvProblem& problem, std::mt19937_64& rng) {
  const StepSampler& smp = problem.sampler();
  const int s = problem.sys().s();
  if (p.size() != s) throw Error(ErrorCode::kShapeMismatch, "sample_parameter_step: parameter size");
  MatrixXd f(smp.eq_P.rows() + smp.eq_R.rows(), s);
  f << smp.eq_P, smp.eq_R;
  VectorXd g(f.rows());
  g << smp.eq_P_rhs - smp.eq_P * p, smp.eq_R_rhs;
  const VectorXd base = min_norm_solve(f, g, s);
  const int k = static_cast<int>(smp.null_basis.cols());
  if (k == 0) return p + base;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  VectorXd z(k);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (int i = 0; i < k; ++i) z(i) = smp.z_lo(i) + (smp.z_hi(i) - smp.z_lo(i)) * unit(rng);
    const VectorXd step = base + smp.null_basis * z;
    const VectorXd next = p + step;
    if (contains(problem.R(), step, 1e-9) && contains(problem.P(), next, 1e-9)) return next;
  }
  std::cerr << "warning: parameter step sampler exhausted its tries, keeping p\n";
  return p;
}

VectorXd sample_parameter(const LpvProblem& problem, std::mt19937_64& rng) {
  const StepSampler& smp = problem.sampler();
  const int k = static_cast<int>(smp.p_basis.cols());
  if (k == 0) return smp.p_offset;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  VectorXd z(k);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (int i = 0; i < k; ++i) z(i) = smp.p_lo(i) + (smp.p_hi(i) - smp.p_lo(i)) * unit(rng);
    const VectorXd p = smp.p_offset + smp.p_basis * z;
    if (contains(problem.P(), p, 1e-9)) return p;
  }
  std::cerr << "warning: parameter sampler exhausted its tries, using the first vertex of P\n";
  return problem.vertices_P().vertices.front();
}

}  // namespace pdrci
