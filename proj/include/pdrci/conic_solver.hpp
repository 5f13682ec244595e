#pragma once

// Primal-dual interior point method for linear conic programs
//
//   minimize    c'x
//   subject to  A x = b
//               G x + s = h,   s in K
//
// where K is a product of a nonnegative orthant and positive semidefinite
// cones. Semidefinite blocks are stored in "svec" form: the lower triangle
// in column-major order with off-diagonal entries scaled by sqrt(2), so that
// svec(U)'svec(V) = trace(UV).
//
// The method is the homogeneous self-dual embedding with Nesterov-Todd
// scaling and a Mehrotra predictor-corrector step. Each iteration factors a
// regularized quasi-definite KKT matrix with a sparse LDL' decomposition.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace pdrci::conic {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

struct Cones {
  int nonneg = 0;
  std::vector<int> psd;  // order of each semidefinite block

  int dimension() const;
  // Barrier parameter: nonneg + sum of block orders.
  int degree() const;
};

struct Problem {
  Eigen::VectorXd c;
  SparseMatrix A;  // may have zero rows
  Eigen::VectorXd b;
  SparseMatrix G;
  Eigen::VectorXd h;
  Cones cones;
};

struct Settings {
  double feastol = 1e-8;
  double abstol = 1e-8;
  double reltol = 1e-8;
  int max_iter = 120;
  double static_reg = 1e-9;
  int refine_steps = 3;
  // Ruiz equilibration passes applied before solving (0 disables).
  int equilibrate_passes = 10;
  bool verbose = false;
};

enum class Status {
  kOptimal,
  kPrimalInfeasible,
  kDualInfeasible,
  kMaxIterations,
  kNumericalFailure,
};

std::string to_string(Status status);

// When the method stops early, x, y, z, s and the residuals describe the best iterate seen.
struct Result {
  Status status = Status::kNumericalFailure;
  Eigen::VectorXd x, y, z, s;
  double pcost = 0.0;
  double dcost = 0.0;
  double gap = 0.0;
  double pres = 0.0;
  double dres = 0.0;
  int iterations = 0;
};

Result solve(const Problem& problem, const Settings& settings = {});

// svec helpers.
inline int svec_size(int order) { return order * (order + 1) / 2; }
// Position of entry (i, j), i >= j, inside the svec of an order-k block.
inline int svec_index(int order, int i, int j) {
  if (i < j) std::swap(i, j);
  return j * order - j * (j - 1) / 2 + (i - j);
}
Eigen::VectorXd svec(const Eigen::MatrixXd& m);
Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v, int order);

}  // namespace pdrci::conic
