#pragma once

#include "pdrci/lpv_model.hpp"

namespace pdrci {

struct MrciResult {
  HPolytope set;  // normalized, irredundant rows
  int iterations = 0;
};

// Maximal robust control invariant set by the backward recursion
//   Omega_{k+1} = X  cap  (for every vertex p of P) {x : exists u in U, A(p) x + B(p) u + W in Omega_k}.
// Scoped to n = 2, m = 1. Throws kNotConverged / kEmptyResult.
MrciResult mrci_detail(const LpvProblem& problem, int max_iter = 200, double tol = 1e-9);
HPolytope mrci(const LpvProblem& problem, int max_iter = 200, double tol = 1e-9);

}  // namespace pdrci
