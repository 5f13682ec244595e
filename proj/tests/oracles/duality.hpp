#pragma once

// Duality-encoding oracle: max{a'x : M x <= q} <= b holds exactly when some Lambda >= 0 has
// Lambda q <= b and Lambda M = a'. The left side is decided by exact rational vertex enumeration,
// the right side by the LP solver.

#include <random>

#include "oracles/rational_vertices.hpp"
#include "pdrci/linprog.hpp"

namespace oracle {

struct DualityTally {
  int instances = 0;
  int mismatches = 0;
  int bounded_true = 0;  // instances where the bound holds
};

inline DualityTally check_duality_encoding(int instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coef(-3, 3), off(1, 6), gap(1, 4);
  std::bernoulli_distribution sign(0.5);
  DualityTally tally;
  for (; tally.instances < instances; ++tally.instances) {
    const int extra = 1 + tally.instances % 3;
    Eigen::MatrixXi mi(6 + extra, 3);
    Eigen::VectorXi qi(6 + extra);
    mi.topRows(3) = Eigen::Matrix3i::Identity();
    mi.middleRows(3, 3) = -Eigen::Matrix3i::Identity();
    qi.head(6).setConstant(4);
    for (int r = 0; r < extra; ++r) {
      mi.row(6 + r) << coef(rng), coef(rng), coef(rng);
      qi(6 + r) = off(rng);
    }
    const Eigen::Vector3i ai(coef(rng), coef(rng), coef(rng));
    mpq_class best;
    bool first = true;
    for (const auto& v : vertices3(mi, qi)) {
      const mpq_class val = ai(0) * v[0] + ai(1) * v[1] + ai(2) * v[2];
      if (first || val > best) best = val;
      first = false;
    }
    // b sits a quarter-integer or more away from the optimum so that the answer is unambiguous.
    const mpq_class bq = best + (sign(rng) ? 1 : -1) * mpq_class(gap(rng), 4);
    const bool exact = best <= bq;

    const int m = static_cast<int>(mi.rows());
    const Eigen::MatrixXd mm = mi.cast<double>();
    const Eigen::VectorXd q = qi.cast<double>();
    Eigen::MatrixXd a_ineq(m + 1, m);
    Eigen::VectorXd b_ineq(m + 1);
    a_ineq << -Eigen::MatrixXd::Identity(m, m), q.transpose();
    b_ineq << Eigen::VectorXd::Zero(m), bq.get_d();
    const pdrci::lp::Result r =
        pdrci::lp::minimize(Eigen::VectorXd::Zero(m), a_ineq, b_ineq, mm.transpose(), ai.cast<double>());
    const bool encoded = r.status == pdrci::lp::Status::kOptimal;
    tally.mismatches += encoded != exact;
    tally.bounded_true += exact;
  }
  return tally;
}

}  // namespace oracle
