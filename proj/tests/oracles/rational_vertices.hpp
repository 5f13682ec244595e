#pragma once

// Exact vertex enumeration for small integer polytopes, used only as a test oracle.

#include <gmpxx.h>

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

namespace oracle {

using RationalPoint = std::vector<mpq_class>;

// Solves the 3x3 system by Cramer's rule; returns false when singular.
inline bool solve3(const std::vector<std::vector<mpq_class>>& a, const std::vector<mpq_class>& b,
                   RationalPoint& x) {
  auto det = [](const std::vector<std::vector<mpq_class>>& m) -> mpq_class {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const mpq_class d = det(a);
  if (d == 0) return false;
  x.assign(3, 0);
  for (int c = 0; c < 3; ++c) {
    auto m = a;
    for (int r = 0; r < 3; ++r) m[r][c] = b[r];
    x[c] = det(m) / d;
  }
  return true;
}

// All vertices of {x in R^3 : A x <= b} with integer data, exact arithmetic.
inline std::vector<RationalPoint> vertices3(const Eigen::MatrixXi& a, const Eigen::VectorXi& b) {
  const int m = static_cast<int>(a.rows());
  std::vector<RationalPoint> out;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      for (int k = j + 1; k < m; ++k) {
        std::vector<std::vector<mpq_class>> sub(3, std::vector<mpq_class>(3));
        std::vector<mpq_class> rhs(3);
        const int idx[3] = {i, j, k};
        for (int r = 0; r < 3; ++r) {
          for (int c = 0; c < 3; ++c) sub[r][c] = a(idx[r], c);
          rhs[r] = b(idx[r]);
        }
        RationalPoint x;
        if (!solve3(sub, rhs, x)) continue;
        bool feasible = true;
        for (int r = 0; r < m && feasible; ++r) {
          mpq_class lhs = 0;
          for (int c = 0; c < 3; ++c) lhs += a(r, c) * x[c];
          feasible = lhs <= b(r);
        }
        if (feasible && std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
      }
    }
  }
  return out;
}

}  // namespace oracle
