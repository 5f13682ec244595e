#include "pdrci/mrci.hpp"

namespace pdrci {

namespace {

// Largest violation of `outer` over the vertices of `inner`.
double containment_gap(const VPolytope& inner, const HPolytope& outer) {
  double gap = -INFINITY;
  for (const auto& v : inner.vertices) gap = std::max(gap, (outer.A() * v - outer.b()).maxCoeff());
  return gap;
}

}  // namespace

MrciResult mrci_detail(const LpvProblem& problem, int max_iter, double tol) {
  const LpvSystem& sys = problem.sys();
  const int n = sys.n();
  const int m = sys.m();
  if (n != 2 || m != 1) throw Error(ErrorCode::kShapeMismatch, "mrci: only n = 2, m = 1 is supported");

  const HPolytope x_set = minimal_hrep(problem.X());
  HPolytope omega = x_set;
  for (int it = 1; it <= max_iter; ++it) {
    // Tighten by the disturbance: h - max_{w in W} H w.
    VectorXd tight(omega.rows());
    for (int i = 0; i < omega.rows(); ++i) tight(i) = omega.b()(i) - support_value(problem.W(), omega.A().row(i).transpose());

    HPolytope next = x_set;
    for (const auto& p : problem.vertices_P().vertices) {
      const auto [a, b] = evaluate_matrices(sys, p);
      // {(x, u) : H (A x + B u) <= tight, x in X, u in U}
      MatrixXd lifted_a(omega.rows() + x_set.rows() + problem.U().rows(), n + m);
      VectorXd lifted_b(lifted_a.rows());
      lifted_a << omega.A() * a, omega.A() * b, x_set.A(), MatrixXd::Zero(x_set.rows(), m),
          MatrixXd::Zero(problem.U().rows(), n), problem.U().A();
      lifted_b << tight, x_set.b(), problem.U().b();
      const HPolytope lifted(lifted_a, lifted_b);
      if (is_empty(lifted)) throw Error(ErrorCode::kEmptyResult, "mrci: recursion became empty");
      next = next.intersect(project(lifted, n));
    }
    if (is_empty(next)) throw Error(ErrorCode::kEmptyResult, "mrci: recursion became empty");
    next = minimal_hrep(next);
    const VPolytope current_vertices = enumerate_vertices(omega);
    if (containment_gap(current_vertices, next) <= tol) return {next, it};
    omega = next;
  }
  throw Error(ErrorCode::kNotConverged, "mrci: no fixed point within " + std::to_string(max_iter) + " iterations");
}

HPolytope mrci(const LpvProblem& problem, int max_iter, double tol) {
  return mrci_detail(problem, max_iter, tol).set;
}

}  // namespace pdrci
