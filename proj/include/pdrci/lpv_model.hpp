#pragma once

// Polytopic LPV systems x+ = A(p) x + B(p) u + w with bounded parameter variation.

#include <random>
#include <utility>
#include <vector>

#include "pdrci/polytope.hpp"

namespace pdrci {

class LpvSystem {
 public:
  LpvSystem() = default;
  LpvSystem(std::vector<MatrixXd> a, std::vector<MatrixXd> b);

  const std::vector<MatrixXd>& A() const { return a_; }
  const std::vector<MatrixXd>& B() const { return b_; }
  int n() const { return n_; }
  int m() const { return m_; }
  int s() const { return static_cast<int>(a_.size()); }

 private:
  std::vector<MatrixXd> a_, b_;
  int n_ = 0, m_ = 0;
};

// A(p) = sum_j p_j A^j, B(p) = sum_j p_j B^j.
std::pair<MatrixXd, MatrixXd> evaluate_matrices(const LpvSystem& sys, const VectorXd& p);

// Raw model data, not yet checked against the standing assumptions.
struct LpvData {
  LpvSystem sys;
  HPolytope X, U, W, P, R;
};

// Affine parametrization of {p~ : p~ in R, p + p~ in P} used by the sampler.
struct StepSampler {
  MatrixXd eq_P;      // rows a with a'(p + p~) = c implied by paired rows of P
  VectorXd eq_P_rhs;
  MatrixXd eq_R;      // rows a with a'p~ = c implied by paired rows of R
  VectorXd eq_R_rhs;
  MatrixXd null_basis;  // orthonormal basis of the free directions
  VectorXd z_lo, z_hi;  // bounding box of R in null-basis coordinates
  // Same data for sampling P itself.
  VectorXd p_offset;
  MatrixXd p_basis;
  VectorXd p_lo, p_hi;
};

class LpvProblem {
 public:
  LpvProblem() = default;
  // Validates 0 in R, p >= 0 on P, boundedness of W, P, R, and caches vertices.
  explicit LpvProblem(LpvData data);

  const LpvSystem& sys() const { return data_.sys; }
  const HPolytope& X() const { return data_.X; }
  const HPolytope& U() const { return data_.U; }
  const HPolytope& W() const { return data_.W; }
  const HPolytope& P() const { return data_.P; }
  const HPolytope& R() const { return data_.R; }
  const LpvData& data() const { return data_; }
  const VPolytope& vertices_P() const { return vertices_P_; }
  const VPolytope& vertices_W() const { return vertices_W_; }
  const StepSampler& sampler() const { return sampler_; }

  // Same model with R replaced (vertex caches are kept).
  LpvProblem with_rate_bound(const HPolytope& r) const;

 private:
  LpvData data_;
  VPolytope vertices_P_, vertices_W_;
  StepSampler sampler_;
};

struct LiftedProblem {
  LpvProblem problem;
  VectorXd shift;  // p_ring, so that p_ring + p_hat >= 0 on P_hat
};

// Prepends a constant parameter fixed to 1 and shifts P_hat into the nonnegative orthant.
LiftedProblem lift_nonnegative(const LpvData& data);
// (1, shift + p_hat)
VectorXd lift_parameter(const VectorXd& p_hat, const VectorXd& shift);

// Joint description of (p, p~) with p in P, p~ in R, p + p~ in P.
struct PPlusData {
  MatrixXd H_pdelta;
  VectorXd h_pdelta;
};
PPlusData build_pplus(const HPolytope& p, const HPolytope& r);

// Uniform rejection sample of p+ in ({p} + R) intersected with P. Falls back to p after 1e5 tries.
VectorXd sample_parameter_step(const VectorXd& p, const LpvProblem& problem, std::mt19937_64& rng);

// Uniform rejection sample of a point in P (same affine handling as the step sampler).
VectorXd sample_parameter(const LpvProblem& problem, std::mt19937_64& rng);

}  // namespace pdrci
