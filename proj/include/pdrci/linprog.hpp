#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace pdrci::lp {

enum class Status { kOptimal, kInfeasible, kUnbounded, kFailed };

struct Result {
  Status status = Status::kFailed;
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd dual_ineq;  // multipliers of a_ineq x <= b_ineq (>= 0)
  Eigen::VectorXd dual_eq;
};

// minimize c'x  s.t.  a_ineq x <= b_ineq,  a_eq x = b_eq.
Result minimize(const Eigen::VectorXd& c, const Eigen::MatrixXd& a_ineq,
                const Eigen::VectorXd& b_ineq, const Eigen::MatrixXd& a_eq = Eigen::MatrixXd(),
                const Eigen::VectorXd& b_eq = Eigen::VectorXd());

Result minimize(const Eigen::VectorXd& c, const Eigen::SparseMatrix<double>& a_ineq,
                const Eigen::VectorXd& b_ineq, const Eigen::SparseMatrix<double>& a_eq,
                const Eigen::VectorXd& b_eq);

}  // namespace pdrci::lp
