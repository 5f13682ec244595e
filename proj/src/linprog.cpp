#include "pdrci/linprog.hpp"

#include "pdrci/conic_solver.hpp"

namespace pdrci::lp {

Result minimize(const Eigen::VectorXd& c, const Eigen::SparseMatrix<double>& a_ineq,
                const Eigen::VectorXd& b_ineq, const Eigen::SparseMatrix<double>& a_eq,
                const Eigen::VectorXd& b_eq) {
  const auto n = c.size();
  conic::Problem prob;
  prob.c = c;
  prob.G = a_ineq;
  prob.h = b_ineq;
  prob.cones.nonneg = static_cast<int>(b_ineq.size());
  if (a_eq.rows() == 0) {
    prob.A.resize(0, n);
    prob.b.resize(0);
  } else {
    prob.A = a_eq;
    prob.b = b_eq;
  }
  if (prob.G.rows() == 0) prob.G.resize(0, n);

  const conic::Result r = conic::solve(prob);
  Result out;
  switch (r.status) {
    case conic::Status::kOptimal:
      out.status = Status::kOptimal;
      break;
    case conic::Status::kPrimalInfeasible:
      out.status = Status::kInfeasible;
      break;
    case conic::Status::kDualInfeasible:
      out.status = Status::kUnbounded;
      break;
    default:
      // Accept a nearly converged point; callers check residuals they care about.
      out.status = (r.pres < 1e-6 && r.dres < 1e-6 && r.gap < 1e-6) ? Status::kOptimal
                                                                   : Status::kFailed;
      break;
  }
  out.x = r.x;
  out.value = r.pcost;
  out.dual_ineq = r.z;
  out.dual_eq = r.y;
  return out;
}

Result minimize(const Eigen::VectorXd& c, const Eigen::MatrixXd& a_ineq,
                const Eigen::VectorXd& b_ineq, const Eigen::MatrixXd& a_eq,
                const Eigen::VectorXd& b_eq) {
  const auto n = c.size();
  Eigen::SparseMatrix<double> ai = a_ineq.rows() > 0 ? Eigen::SparseMatrix<double>(a_ineq.sparseView())
                                                     : Eigen::SparseMatrix<double>(0, n);
  Eigen::SparseMatrix<double> ae = a_eq.rows() > 0 ? Eigen::SparseMatrix<double>(a_eq.sparseView())
                                                   : Eigen::SparseMatrix<double>(0, n);
  return minimize(c, ai, b_ineq, ae, a_eq.rows() > 0 ? b_eq : Eigen::VectorXd());
}

}  // namespace pdrci::lp
