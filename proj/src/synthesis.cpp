#include "pdrci/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "pdrci/linprog.hpp"

namespace pdrci {

namespace {

using conic::Triplet;

constexpr double kStallAcceptTol = 1e-6;

// Column offsets of every decision block. Absent blocks have offset -1.
struct Layout {
  int n = 0, m = 0, s = 0, ms = 0, nv = 0, mx = 0, mu = 0, mp = 0, mpd = 0, nt = 0, theta = 0, md = 0;
  bool quasi = false;
  int y0 = 0, Y = -1, yl = -1, Yl = -1, u0 = 0, U = 0, lam = -1, mu_ = 0, q = -1, gam = 0, cover = 0,
      eps = 0, total = 0;
  int ngam = 0;

  int y0_(int i) const { return y0 + i; }
  int Y_(int i, int j) const { return Y < 0 ? -1 : Y + j * ms + i; }
  int yl_(int i) const { return quasi ? y0_(i) : yl + i; }
  int Yl_(int i, int j) const { return Yl < 0 ? -1 : Yl + j * ms + i; }
  int u0_(int k, int q2) const { return u0 + k * m + q2; }
  int U_(int k, int q2, int j) const { return U + k * m * s + j * m + q2; }
  int lam_(int k, int r, int a) const { return lam + k * mx * mp + a * mx + r; }
  int mu__(int k, int r, int a) const { return mu_ + k * mu * mp + a * mu + r; }
  int q_(int i, int a) const { return q + a * ms + i; }
  int gam_(int k, int i, int pair) const { return gam + (k * ms + i) * ngam + pair; }
  int cover_(int j, int t, int c) const { return cover + (j * nt + t) * n + c; }
  int eps_(int j, int r) const { return eps + j * md + r; }
};

// Sparse row builder for one constraint family.
struct RowBuilder {
  std::vector<Triplet> trip;
  std::vector<double> rhs;

  int add(double b) {
    rhs.push_back(b);
    return static_cast<int>(rhs.size()) - 1;
  }
  void coef(int row, int col, double v) {
    if (col >= 0 && v != 0.0) trip.emplace_back(row, col, v);
  }
  int rows() const { return static_cast<int>(rhs.size()); }
};

struct Groups {
  // name -> [begin, end) rows in the inequality system (nonneg part) or equality system
  std::vector<std::pair<std::string, std::pair<int, int>>> ineq, eq;
  int psd_begin = 0, psd_end = 0;
};

std::vector<std::pair<int, int>> gamma_pairs(int mp) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < mp; ++a) {
    for (int b = a + 1; b < mp; ++b) out.emplace_back(a, b);
  }
  return out;
}

// Configuration cone {y : E y <= 0} split into rows that can be strictly satisfied and an
// orthonormal basis of the implicit equalities. Non-simple seeds make the cone lower
// dimensional; passing those rows as inequalities would leave the SDP without an interior.
struct ConeRows {
  MatrixXd ineq, eq;
};

ConeRows reduced_cone(const MatrixXd& e) {
  std::vector<int> keep;
  for (int r = 0; r < e.rows(); ++r) {
    if (e.row(r).cwiseAbs().maxCoeff() <= 1e-12) continue;
    bool dup = false;
    for (int k : keep) {
      if ((e.row(k) - e.row(r)).cwiseAbs().maxCoeff() <= 1e-12) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(r);
  }
  const int nr = static_cast<int>(keep.size());
  const int ms = static_cast<int>(e.cols());
  ConeRows out;
  if (nr == 0) {
    out.ineq.resize(0, ms);
    out.eq.resize(0, ms);
    return out;
  }
  // max sum(t) s.t. E y + t <= 0, 0 <= t <= 1; rows left at t = 0 are implicit equalities.
  std::vector<Eigen::Triplet<double>> trip;
  for (int r = 0; r < nr; ++r) {
    for (int i = 0; i < ms; ++i) {
      if (e(keep[r], i) != 0.0) trip.emplace_back(r, i, e(keep[r], i));
    }
    trip.emplace_back(r, ms + r, 1.0);
    trip.emplace_back(nr + r, ms + r, 1.0);
    trip.emplace_back(2 * nr + r, ms + r, -1.0);
  }
  Eigen::SparseMatrix<double> a(3 * nr, ms + nr);
  a.setFromTriplets(trip.begin(), trip.end());
  VectorXd b = VectorXd::Zero(3 * nr);
  b.segment(nr, nr).setOnes();
  VectorXd c = VectorXd::Zero(ms + nr);
  c.tail(nr).setConstant(-1.0);
  const lp::Result res = lp::minimize(c, a, b, Eigen::SparseMatrix<double>(0, ms + nr), VectorXd());
  std::vector<int> strict, tight;
  for (int r = 0; r < nr; ++r) {
    const bool slack = res.status != lp::Status::kOptimal || res.x(ms + r) > 0.5;
    (slack ? strict : tight).push_back(keep[r]);
  }
  out.ineq.resize(static_cast<Eigen::Index>(strict.size()), ms);
  for (std::size_t r = 0; r < strict.size(); ++r) out.ineq.row(static_cast<Eigen::Index>(r)) = e.row(strict[r]);
  if (tight.empty()) {
    out.eq.resize(0, ms);
    return out;
  }
  MatrixXd t(static_cast<Eigen::Index>(tight.size()), ms);
  for (std::size_t r = 0; r < tight.size(); ++r) t.row(static_cast<Eigen::Index>(r)) = e.row(tight[r]);
  Eigen::JacobiSVD<MatrixXd> svd(t, Eigen::ComputeFullV);
  const VectorXd sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-9 * sv(0)) ++rank;
  }
  out.eq = svd.matrixV().leftCols(rank).transpose();
  return out;
}

// Rows of {x : A x <= b} that come in opposite pairs encode an equality. The earlier row of
// each pair gets a free multiplier and the later row a multiplier fixed at zero, which removes
// the unbounded ray (t, t) that the pair otherwise adds to the multiplier set.
enum class RowKind { kInequality, kFree, kDropped };
struct RowPairs {
  std::vector<RowKind> kind;
  std::vector<int> partner;
};

RowPairs equality_pairs(const MatrixXd& a, const VectorXd& b) {
  const int m = static_cast<int>(a.rows());
  RowPairs out{std::vector<RowKind>(m, RowKind::kInequality), std::vector<int>(m, -1)};
  for (int i = 0; i < m; ++i) {
    if (out.kind[i] != RowKind::kInequality) continue;
    const double ni = a.row(i).norm();
    for (int j = i + 1; j < m; ++j) {
      if (out.kind[j] != RowKind::kInequality) continue;
      const double nj = a.row(j).norm();
      if ((a.row(i) / ni + a.row(j) / nj).cwiseAbs().maxCoeff() <= 1e-12 &&
          std::abs(b(i) / ni + b(j) / nj) <= 1e-12) {
        out.kind[i] = RowKind::kFree;
        out.kind[j] = RowKind::kDropped;
        out.partner[i] = j;
        out.partner[j] = i;
        break;
      }
    }
  }
  return out;
}

// True when a paired row of P reads a'p = b with a >= 0 and b > 0 (after orientation).
bool constant_in_span(const MatrixXd& hp, const VectorXd& hpb, const RowPairs& rp) {
  for (int a = 0; a < static_cast<int>(rp.kind.size()); ++a) {
    if (rp.kind[a] != RowKind::kFree) continue;
    const double sign = hpb(a) > 0.0 ? 1.0 : -1.0;
    const double scale = hp.row(a).cwiseAbs().maxCoeff();
    if (std::abs(hpb(a)) <= 1e-9 * scale) continue;
    if ((sign * hp.row(a)).minCoeff() >= -1e-12 * scale) return true;
  }
  return false;
}

// Splits a free multiplier v on row a into nonnegative parts on a and its partner.
template <typename Row>
void split_free(const RowPairs& rp, Row&& row) {
  for (int a = 0; a < static_cast<int>(rp.kind.size()); ++a) {
    if (rp.kind[a] != RowKind::kFree || row(a) >= 0.0) continue;
    row(rp.partner[a]) = -row(a);
    row(a) = 0.0;
  }
}

void check_spec(const SynthesisSpec& spec) {
  const LpvSystem& sys = spec.problem.sys();
  const ConfiguredTemplate& t = spec.tmpl;
  if (t.n() != sys.n()) throw Error(ErrorCode::kShapeMismatch, "synthesize: template dimension differs from the state");
  if (spec.D.cols() != sys.n() || spec.D.rows() == 0) {
    throw Error(ErrorCode::kShapeMismatch, "synthesize: D must have n columns");
  }
  for (Eigen::Index r = 0; r < spec.D.rows(); ++r) {
    if (spec.D.row(r).cwiseAbs().maxCoeff() <= 1e-12) throw Error(ErrorCode::kShapeMismatch, "synthesize: zero row in D");
  }
  if (spec.sampled_params.empty()) throw Error(ErrorCode::kShapeMismatch, "synthesize: no sampled parameters");
  for (const auto& p : spec.sampled_params) {
    if (p.size() != sys.s()) throw Error(ErrorCode::kShapeMismatch, "synthesize: sampled parameter size");
    if (!contains(spec.problem.P(), p, 1e-8)) {
      throw Error(ErrorCode::kInvalidInput, "synthesize: sampled parameter lies outside P");
    }
  }
  if (spec.X_vertices.size() == 0 || spec.X_vertices.dim() != sys.n()) {
    throw Error(ErrorCode::kShapeMismatch, "synthesize: vertices of X missing or of wrong size");
  }
}

}  // namespace

SynthesisSpec make_synthesis_spec(const LpvProblem& problem, const ConfiguredTemplate& tmpl, const MatrixXd& d) {
  SynthesisSpec spec{problem, tmpl, d.size() == 0 ? tmpl.C : d, problem.vertices_P().vertices,
                     enumerate_vertices(problem.X())};
  return spec;
}

VectorXd tightening_vector(const ConfiguredTemplate& t, const HPolytope& w) {
  VectorXd d(t.ms());
  for (int i = 0; i < t.ms(); ++i) d(i) = support_value(w, t.C.row(i).transpose());
  return d;
}

MatrixXd build_M_ik(const ConfiguredTemplate& t, const LpvSystem& sys, int i, int k) {
  if (i < 0 || i >= t.ms() || k < 0 || k >= t.N()) throw Error(ErrorCode::kShapeMismatch, "build_M_ik: index");
  MatrixXd out(sys.s(), t.ms() + sys.m());
  const auto ci = t.C.row(i);
  for (int j = 0; j < sys.s(); ++j) {
    out.row(j).head(t.ms()) = ci * sys.A()[j] * t.V[k];
    out.row(j).tail(sys.m()) = ci * sys.B()[j];
  }
  return out;
}

MatrixXd build_F(const VectorXd& y0, const MatrixXd& Y, const VectorXd& u0k, const MatrixXd& Uk,
                 const VectorXd& y_inner, const MatrixXd& Y_inner, const MatrixXd& M_ik, double d_i, int i) {
  const auto s = M_ik.rows();
  if (Y.cols() != s || Uk.cols() != s || Y_inner.cols() != s ||
      M_ik.cols() != y0.size() + u0k.size() || Y.rows() != y0.size() || Uk.rows() != u0k.size()) {
    throw Error(ErrorCode::kShapeMismatch, "build_F: inconsistent shapes");
  }
  MatrixXd stacked(Y.rows() + Uk.rows(), s);
  stacked << Y, Uk;
  VectorXd offsets(y0.size() + u0k.size());
  offsets << y0, u0k;
  const MatrixXd b = M_ik * stacked;
  MatrixXd f(s + 1, s + 1);
  f.topLeftCorner(s, s) = -(b + b.transpose());
  const VectorXd top_right = -(M_ik * offsets - Y_inner.row(i).transpose());
  f.topRightCorner(s, 1) = top_right;
  f.bottomLeftCorner(1, s) = top_right.transpose();
  f(s, s) = 2.0 * (y_inner(i) - d_i);
  return f;
}

MatrixXd parameter_hull_map(const LpvProblem& problem) {
  const StepSampler& smp = problem.sampler();
  const int s = problem.sys().s();
  const auto k = smp.p_basis.cols();
  // z spans the bounding box of P in basis coordinates as [-1, 1]^k, which keeps the
  // blocks well scaled when the parameter ranges differ by orders of magnitude.
  const VectorXd mid = 0.5 * (smp.p_lo + smp.p_hi);
  const VectorXd half = (0.5 * (smp.p_hi - smp.p_lo)).cwiseMax(1e-12);
  MatrixXd t = MatrixXd::Zero(s + 1, k + 1);
  t.topLeftCorner(s, k) = smp.p_basis * half.asDiagonal();
  t.topRightCorner(s, 1) = smp.p_offset + smp.p_basis * mid;
  t(s, k) = 1.0;
  return t;
}

MatrixXd build_G(const MatrixXd& gamma, const MatrixXd& hp_mat, const VectorXd& hp) {
  const auto mp = hp_mat.rows();
  if (gamma.rows() != mp || gamma.cols() != mp || hp.size() != mp) {
    throw Error(ErrorCode::kShapeMismatch, "build_G: inconsistent shapes");
  }
  if ((gamma - gamma.transpose()).cwiseAbs().maxCoeff() > 1e-9 || gamma.minCoeff() < -1e-9 ||
      gamma.diagonal().cwiseAbs().maxCoeff() > 1e-9) {
    throw Error(ErrorCode::kInvalidMultiplier, "build_G: Gamma must be symmetric, nonnegative, zero-diagonal");
  }
  const auto s = hp_mat.cols();
  MatrixXd g(s + 1, s + 1);
  g.topLeftCorner(s, s) = hp_mat.transpose() * gamma * hp_mat;
  const VectorXd off = -hp_mat.transpose() * gamma * hp;
  g.topRightCorner(s, 1) = off;
  g.bottomLeftCorner(1, s) = off.transpose();
  g(s, s) = hp.dot(gamma * hp);
  return g;
}

PdRciSolution synthesize(const SynthesisSpec& spec) {
  check_spec(spec);
  const auto t_start = std::chrono::steady_clock::now();
  const LpvProblem& prob = spec.problem;
  const LpvSystem& sys = prob.sys();
  const ConfiguredTemplate& tm = spec.tmpl;
  const MatrixXd& hx = prob.X().A();
  const VectorXd& hxb = prob.X().b();
  const MatrixXd& hu = prob.U().A();
  const VectorXd& hub = prob.U().b();
  const MatrixXd& hp = prob.P().A();
  const VectorXd& hpb = prob.P().b();
  const PPlusData pplus = build_pplus(prob.P(), prob.R());
  const VectorXd d = tightening_vector(tm, prob.W());

  Layout L;
  L.n = sys.n();
  L.m = sys.m();
  L.s = sys.s();
  L.ms = tm.ms();
  L.nv = tm.N();
  L.mx = prob.X().rows();
  L.mu = prob.U().rows();
  L.mp = prob.P().rows();
  L.mpd = static_cast<int>(pplus.h_pdelta.size());
  L.nt = spec.X_vertices.size();
  L.theta = static_cast<int>(spec.sampled_params.size());
  L.md = static_cast<int>(spec.D.rows());
  L.quasi = spec.fix_Y_zero;
  L.ngam = L.mp * (L.mp - 1) / 2;
  const auto pairs = gamma_pairs(L.mp);
  const RowPairs p_rows = equality_pairs(hp, hpb);
  const RowPairs pd_rows = equality_pairs(pplus.H_pdelta, pplus.h_pdelta);
  auto pair_kind = [&](int pr) {
    const auto [ga, gb] = pairs[pr];
    const RowKind ka = p_rows.kind[ga], kb = p_rows.kind[gb];
    // Products with an equality row vanish on P; they are left out because together they
    // admit zero combinations that would make the multiplier set unbounded.
    if (ka != RowKind::kInequality || kb != RowKind::kInequality) return RowKind::kDropped;
    return RowKind::kInequality;
  };

  int col = 0;
  L.y0 = col;
  col += L.ms;
  if (!L.quasi) {
    L.Y = col;
    col += L.ms * L.s;
    L.yl = col;
    col += L.ms;
    L.Yl = col;
    col += L.ms * L.s;
  }
  L.u0 = col;
  col += L.nv * L.m;
  L.U = col;
  col += L.nv * L.m * L.s;
  if (!L.quasi) {
    L.lam = col;
    col += L.nv * L.mx * L.mp;
  }
  L.mu_ = col;
  col += L.nv * L.mu * L.mp;
  if (!L.quasi) {
    L.q = col;
    col += L.ms * L.mpd;
  }
  L.gam = col;
  col += L.nv * L.ms * L.ngam;
  L.cover = col;
  col += L.theta * L.nt * L.n;
  L.eps = col;
  col += L.theta * L.md;
  L.total = col;

  RowBuilder ineq, eq;
  Groups groups;
  // Sign constraint on a multiplier column, or a zero fix for dropped rows.
  auto sign_row = [&](RowKind kind, int c) {
    if (kind == RowKind::kInequality) ineq.coef(ineq.add(0.0), c, -1.0);
  };
  std::vector<int> fixed_zero;
  // When P satisfies a'p = b with a >= 0 and b > 0, the constant terms are redundant:
  // y0 + Y p = (Y + y0 a'/b) p keeps every column in the configuration cone.
  if (constant_in_span(hp, hpb, p_rows)) {
    for (int i = 0; i < L.ms && !L.quasi; ++i) {
      fixed_zero.push_back(L.y0_(i));
      fixed_zero.push_back(L.yl_(i));
    }
    for (int k = 0; k < L.nv; ++k) {
      for (int q2 = 0; q2 < L.m; ++q2) fixed_zero.push_back(L.u0_(k, q2));
    }
  }
  auto open_group = [](std::vector<std::pair<std::string, std::pair<int, int>>>& g, const std::string& name, int row) {
    g.push_back({name, {row, row}});
  };
  auto close_group = [](std::vector<std::pair<std::string, std::pair<int, int>>>& g, int row) {
    g.back().second.second = row;
  };

  // (a) configuration cone for y0 and every column of Y.
  open_group(groups.ineq, "configuration", ineq.rows());
  open_group(groups.eq, "configuration", eq.rows());
  const ConeRows cone = reduced_cone(tm.E);
  for (int j = 0; j <= (L.quasi ? 0 : L.s); ++j) {
    auto col_of = [&](int i) { return j == 0 ? L.y0_(i) : L.Y_(i, j - 1); };
    for (int r = 0; r < cone.ineq.rows(); ++r) {
      const int row = ineq.add(0.0);
      for (int i = 0; i < L.ms; ++i) ineq.coef(row, col_of(i), cone.ineq(r, i));
    }
    for (int r = 0; r < cone.eq.rows(); ++r) {
      const int row = eq.add(0.0);
      for (int i = 0; i < L.ms; ++i) eq.coef(row, col_of(i), cone.eq(r, i));
    }
  }
  close_group(groups.ineq, ineq.rows());
  close_group(groups.eq, eq.rows());

  // (b) state constraints at every vertex map.
  open_group(groups.ineq, "state", ineq.rows());
  open_group(groups.eq, "state", eq.rows());
  for (int k = 0; k < L.nv; ++k) {
    const MatrixXd hv = hx * tm.V[k];  // mx x ms
    for (int r = 0; r < L.mx; ++r) {
      const int row = ineq.add(hxb(r));
      for (int i = 0; i < L.ms; ++i) ineq.coef(row, L.y0_(i), hv(r, i));
      if (!L.quasi) {
        for (int a = 0; a < L.mp; ++a) ineq.coef(row, L.lam_(k, r, a), hpb(a));
      }
    }
    if (L.quasi) continue;
    for (int r = 0; r < L.mx; ++r) {
      for (int a = 0; a < L.mp; ++a) {
        sign_row(p_rows.kind[a], L.lam_(k, r, a));
        if (p_rows.kind[a] == RowKind::kDropped) fixed_zero.push_back(L.lam_(k, r, a));
      }
    }
    // Lambda^k H^p = H^x V^k Y
    for (int r = 0; r < L.mx; ++r) {
      for (int j = 0; j < L.s; ++j) {
        const int row = eq.add(0.0);
        for (int a = 0; a < L.mp; ++a) eq.coef(row, L.lam_(k, r, a), hp(a, j));
        for (int i = 0; i < L.ms; ++i) eq.coef(row, L.Y_(i, j), -hv(r, i));
      }
    }
  }
  close_group(groups.ineq, ineq.rows());
  close_group(groups.eq, eq.rows());

  // (c) input constraints for every vertex input.
  open_group(groups.ineq, "input", ineq.rows());
  open_group(groups.eq, "input", eq.rows());
  for (int k = 0; k < L.nv; ++k) {
    for (int r = 0; r < L.mu; ++r) {
      const int row = ineq.add(hub(r));
      for (int q2 = 0; q2 < L.m; ++q2) ineq.coef(row, L.u0_(k, q2), hu(r, q2));
      for (int a = 0; a < L.mp; ++a) ineq.coef(row, L.mu__(k, r, a), hpb(a));
    }
    for (int r = 0; r < L.mu; ++r) {
      for (int a = 0; a < L.mp; ++a) {
        sign_row(p_rows.kind[a], L.mu__(k, r, a));
        if (p_rows.kind[a] == RowKind::kDropped) fixed_zero.push_back(L.mu__(k, r, a));
      }
    }
    for (int r = 0; r < L.mu; ++r) {
      for (int j = 0; j < L.s; ++j) {
        const int row = eq.add(0.0);
        for (int a = 0; a < L.mp; ++a) eq.coef(row, L.mu__(k, r, a), hp(a, j));
        for (int q2 = 0; q2 < L.m; ++q2) eq.coef(row, L.U_(k, q2, j), -hu(r, q2));
      }
    }
  }
  close_group(groups.ineq, ineq.rows());
  close_group(groups.eq, eq.rows());

  // (d) inner set y_inner + Y_inner p below y0 + Y p+ for every admissible (p, p~).
  open_group(groups.ineq, "intersection", ineq.rows());
  open_group(groups.eq, "intersection", eq.rows());
  if (!L.quasi) {
    const MatrixXd& hpd = pplus.H_pdelta;
    const VectorXd& hpdb = pplus.h_pdelta;
    for (int i = 0; i < L.ms; ++i) {
      const int row = ineq.add(0.0);
      ineq.coef(row, L.yl_(i), 1.0);
      ineq.coef(row, L.y0_(i), -1.0);
      for (int a = 0; a < L.mpd; ++a) ineq.coef(row, L.q_(i, a), hpdb(a));
    }
    for (int i = 0; i < L.ms; ++i) {
      for (int a = 0; a < L.mpd; ++a) {
        sign_row(pd_rows.kind[a], L.q_(i, a));
        if (pd_rows.kind[a] == RowKind::kDropped) fixed_zero.push_back(L.q_(i, a));
      }
    }
    // Q H^{pd} = [Y_inner - Y, -Y]
    for (int i = 0; i < L.ms; ++i) {
      for (int c = 0; c < 2 * L.s; ++c) {
        const int row = eq.add(0.0);
        for (int a = 0; a < L.mpd; ++a) eq.coef(row, L.q_(i, a), hpd(a, c));
        const int j = c % L.s;
        if (c < L.s) eq.coef(row, L.Yl_(i, j), -1.0);
        eq.coef(row, L.Y_(i, j), 1.0);
      }
    }
  }
  close_group(groups.ineq, ineq.rows());
  close_group(groups.eq, eq.rows());

  // Gamma >= 0 (off-diagonal entries only; the diagonal is structurally zero).
  open_group(groups.ineq, "multiplier Gamma", ineq.rows());
  for (int k = 0; k < L.nv; ++k) {
    for (int i = 0; i < L.ms; ++i) {
      for (int pr = 0; pr < L.ngam; ++pr) {
        sign_row(pair_kind(pr), L.gam_(k, i, pr));
        if (pair_kind(pr) == RowKind::kDropped) fixed_zero.push_back(L.gam_(k, i, pr));
      }
    }
  }
  close_group(groups.ineq, ineq.rows());

  // (f) Minkowski cover of X at the sampled parameters.
  open_group(groups.ineq, "cover", ineq.rows());
  for (int j = 0; j < L.theta; ++j) {
    const VectorXd& pj = spec.sampled_params[j];
    for (int t = 0; t < L.nt; ++t) {
      const VectorXd& xt = spec.X_vertices.vertices[t];
      // C s <= y0 + Y p^j
      for (int i = 0; i < L.ms; ++i) {
        const int row = ineq.add(0.0);
        for (int c = 0; c < L.n; ++c) ineq.coef(row, L.cover_(j, t, c), tm.C(i, c));
        ineq.coef(row, L.y0_(i), -1.0);
        for (int jj = 0; jj < L.s; ++jj) ineq.coef(row, L.Y_(i, jj), -pj(jj));
      }
      // D (x^t - s) <= eps^j
      const VectorXd dx = spec.D * xt;
      for (int r = 0; r < L.md; ++r) {
        const int row = ineq.add(-dx(r));
        for (int c = 0; c < L.n; ++c) ineq.coef(row, L.cover_(j, t, c), -spec.D(r, c));
        ineq.coef(row, L.eps_(j, r), -1.0);
      }
    }
    for (int r = 0; r < L.md; ++r) ineq.coef(ineq.add(0.0), L.eps_(j, r), -1.0);
  }
  close_group(groups.ineq, ineq.rows());

  // (e) LMIs F_ik - G(Gamma^{k,i}) >= 0, written as h - G x = svec(F - G(Gamma)).
  // Every block is restricted to the affine hull of P: [p; 1] = T [z; 1].
  const MatrixXd tmap = parameter_hull_map(prob);
  const int order = static_cast<int>(tmap.cols());
  const int block = conic::svec_size(order);
  const int nblocks = L.nv * L.ms;
  const int n_nonneg = ineq.rows();
  std::vector<Triplet> psd_trip;
  VectorXd psd_h = VectorXd::Zero(static_cast<Eigen::Index>(nblocks) * block);
  // hhat_a = [-H^p_a, h^p_a]
  MatrixXd hhat(L.mp, L.s + 1);
  hhat << -hp, hpb;
  const double r2 = std::sqrt(2.0);
  std::map<int, MatrixXd> coef;
  for (int k = 0; k < L.nv; ++k) {
    for (int i = 0; i < L.ms; ++i) {
      const MatrixXd mik = build_M_ik(tm, sys, i, k);
      const int base = n_nonneg + (k * L.ms + i) * block;
      coef.clear();
      // Adds coefficient v of column col2 to the symmetric entries (r, c) and (c, r) of F.
      auto put = [&](int r, int c, int col2, double v) {
        if (col2 < 0 || v == 0.0) return;
        auto [it, fresh] = coef.try_emplace(col2);
        if (fresh) it->second = MatrixXd::Zero(L.s + 1, L.s + 1);
        it->second(r, c) += v;
        if (r != c) it->second(c, r) += v;
      };
      // Top-left: -(B + B'), B = M [Y; U^k]; entry (a, b) with a >= b.
      for (int a = 0; a < L.s; ++a) {
        for (int b = 0; b <= a; ++b) {
          for (int r = 0; r < L.ms; ++r) {
            put(a, b, L.Y_(r, b), -mik(a, r));
            put(a, b, L.Y_(r, a), -mik(b, r));
          }
          for (int q2 = 0; q2 < L.m; ++q2) {
            put(a, b, L.U_(k, q2, b), -mik(a, L.ms + q2));
            put(a, b, L.U_(k, q2, a), -mik(b, L.ms + q2));
          }
        }
      }
      // Bottom row (index s), column a: -(M_a [y0; u0k]) + Y_inner(i, a).
      for (int a = 0; a < L.s; ++a) {
        for (int r = 0; r < L.ms; ++r) put(L.s, a, L.y0_(r), -mik(a, r));
        for (int q2 = 0; q2 < L.m; ++q2) put(L.s, a, L.u0_(k, q2), -mik(a, L.ms + q2));
        put(L.s, a, L.Yl_(i, a), 1.0);
      }
      put(L.s, L.s, L.yl_(i), 2.0);
      // -G(Gamma): each pair (a, b) contributes -(hhat_a hhat_b' + hhat_b hhat_a').
      for (int pr = 0; pr < L.ngam; ++pr) {
        if (pair_kind(pr) == RowKind::kDropped) continue;
        const auto [ga, gb] = pairs[pr];
        const int gcol = L.gam_(k, i, pr);
        for (int r = 0; r <= L.s; ++r) {
          for (int c = 0; c <= r; ++c) put(r, c, gcol, -(hhat(ga, r) * hhat(gb, c) + hhat(gb, r) * hhat(ga, c)));
        }
      }
      // h - G x = svec(T' F T)
      const double tcorner = tmap(L.s, order - 1);
      psd_h(base - n_nonneg + conic::svec_index(order, order - 1, order - 1)) = -2.0 * d(i) * tcorner * tcorner;
      for (const auto& [col2, f] : coef) {
        const MatrixXd fz = tmap.transpose() * f * tmap;
        const double cut = 1e-14 * std::max(1.0, f.cwiseAbs().maxCoeff());
        for (int c = 0; c < order; ++c) {
          for (int r = c; r < order; ++r) {
            if (std::abs(fz(r, c)) <= cut) continue;
            psd_trip.emplace_back(base + conic::svec_index(order, r, c), col2, -(r == c ? 1.0 : r2) * fz(r, c));
          }
        }
      }
    }
  }

  open_group(groups.eq, "equality pairs", eq.rows());
  for (int c : fixed_zero) eq.coef(eq.add(0.0), c, 1.0);
  close_group(groups.eq, eq.rows());

  conic::Problem cp;
  cp.c = VectorXd::Zero(L.total);
  for (int j = 0; j < L.theta; ++j) {
    for (int r = 0; r < L.md; ++r) cp.c(L.eps_(j, r)) = 1.0;
  }
  const int total_rows = n_nonneg + nblocks * block;
  std::vector<Triplet> gtrip = ineq.trip;
  gtrip.insert(gtrip.end(), psd_trip.begin(), psd_trip.end());
  cp.G.resize(total_rows, L.total);
  cp.G.setFromTriplets(gtrip.begin(), gtrip.end());
  cp.h.resize(total_rows);
  cp.h.head(n_nonneg) = Eigen::Map<const VectorXd>(ineq.rhs.data(), n_nonneg);
  cp.h.tail(nblocks * block) = psd_h;
  cp.A.resize(eq.rows(), L.total);
  cp.A.setFromTriplets(eq.trip.begin(), eq.trip.end());
  cp.b = eq.rows() > 0 ? VectorXd(Eigen::Map<const VectorXd>(eq.rhs.data(), eq.rows())) : VectorXd();
  cp.cones.nonneg = n_nonneg;
  cp.cones.psd.assign(nblocks, order);
  groups.psd_begin = n_nonneg;
  groups.psd_end = total_rows;

  const conic::Result res = conic::solve(cp, spec.options);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  if (res.status == conic::Status::kPrimalInfeasible) {
    // Weight of the certificate carried by each constraint group.
    std::ostringstream msg;
    msg << "synthesize: SDP infeasible; certificate weight by constraint group:";
    const double zn = std::max(res.z.lpNorm<1>() + res.y.lpNorm<1>(), 1e-300);
    for (const auto& [name, range] : groups.ineq) {
      const double w = res.z.segment(range.first, range.second - range.first).lpNorm<1>() / zn;
      if (w > 1e-6) msg << " " << name << "=" << w;
    }
    for (const auto& [name, range] : groups.eq) {
      const double w = res.y.segment(range.first, range.second - range.first).lpNorm<1>() / zn;
      if (w > 1e-6) msg << " " << name << "(eq)=" << w;
    }
    const double wl = res.z.segment(groups.psd_begin, groups.psd_end - groups.psd_begin).lpNorm<1>() / zn;
    if (wl > 1e-6) msg << " lmi=" << wl;
    msg << ". The template may not host a PD-RCI set; consider recomputing it with template-init.";
    throw Error(ErrorCode::kSolverInfeasible, msg.str());
  }
  auto stalled = [&](const std::string& detail) {
    return Error(ErrorCode::kSolverNumericalFailure,
                 "synthesize: conic solver stopped with status " + conic::to_string(res.status) + " (pres " +
                     std::to_string(res.pres) + ", dres " + std::to_string(res.dres) + detail + ")");
  };
  if (res.status != conic::Status::kOptimal && res.x.size() != L.total) throw stalled("");

  const VectorXd& x = res.x;
  auto val = [&](int c) { return c < 0 ? 0.0 : x(c); };
  PdRciSolution sol;
  sol.y0.resize(L.ms);
  sol.Y = MatrixXd::Zero(L.ms, L.s);
  sol.y_inner.resize(L.ms);
  sol.Y_inner = MatrixXd::Zero(L.ms, L.s);
  for (int i = 0; i < L.ms; ++i) {
    sol.y0(i) = val(L.y0_(i));
    sol.y_inner(i) = val(L.yl_(i));
    for (int j = 0; j < L.s; ++j) {
      sol.Y(i, j) = val(L.Y_(i, j));
      sol.Y_inner(i, j) = val(L.Yl_(i, j));
    }
  }
  for (int k = 0; k < L.nv; ++k) {
    VectorXd u0(L.m);
    MatrixXd uk(L.m, L.s);
    for (int q2 = 0; q2 < L.m; ++q2) {
      u0(q2) = val(L.u0_(k, q2));
      for (int j = 0; j < L.s; ++j) uk(q2, j) = val(L.U_(k, q2, j));
    }
    sol.u0.push_back(u0);
    sol.U.push_back(uk);
    MatrixXd lam = MatrixXd::Zero(L.mx, L.mp);
    if (!L.quasi) {
      for (int r = 0; r < L.mx; ++r) {
        for (int a = 0; a < L.mp; ++a) lam(r, a) = val(L.lam_(k, r, a));
        split_free(p_rows, lam.row(r));
      }
    }
    sol.multipliers.Lambda.push_back(lam);
    MatrixXd mu(L.mu, L.mp);
    for (int r = 0; r < L.mu; ++r) {
      for (int a = 0; a < L.mp; ++a) mu(r, a) = val(L.mu__(k, r, a));
      split_free(p_rows, mu.row(r));
    }
    sol.multipliers.M.push_back(mu);
    for (int i = 0; i < L.ms; ++i) {
      MatrixXd g = MatrixXd::Zero(L.mp, L.mp);
      for (int pr = 0; pr < L.ngam; ++pr) {
        auto [ga, gb] = pairs[pr];
        double v = val(L.gam_(k, i, pr));
        if (pair_kind(pr) == RowKind::kFree && v < 0.0) {
          // hhat of the partner row is -hhat of the free row.
          if (p_rows.kind[ga] == RowKind::kFree) {
            ga = p_rows.partner[ga];
          } else {
            gb = p_rows.partner[gb];
          }
          v = -v;
        }
        g(ga, gb) += v;
        if (ga != gb) g(gb, ga) += v;
      }
      sol.multipliers.Gamma.push_back(g);
    }
  }
  sol.multipliers.Q = MatrixXd::Zero(L.ms, L.mpd);
  if (!L.quasi) {
    for (int i = 0; i < L.ms; ++i) {
      for (int a = 0; a < L.mpd; ++a) sol.multipliers.Q(i, a) = val(L.q_(i, a));
      split_free(pd_rows, sol.multipliers.Q.row(i));
    }
  }
  for (int j = 0; j < L.theta; ++j) {
    VectorXd ej(L.md);
    for (int r = 0; r < L.md; ++r) ej(r) = val(L.eps_(j, r));
    sol.eps.push_back(ej);
  }
  sol.d = d;
  sol.stats.objective = res.pcost;
  sol.stats.solve_time = elapsed;
  sol.stats.solver_status = conic::to_string(res.status);
  sol.stats.iterations = res.iterations;
  if (res.status != conic::Status::kOptimal) {
    // A stalled solve is still usable when its best iterate passes the certificate replay.
    const CertificateReport rep = replay_certificate(sol, spec);
    if (!rep.ok(kStallAcceptTol)) {
      throw stalled(", lmi min eigenvalue " + std::to_string(rep.lmi_min_eig) + ", max violation " +
                    std::to_string(std::max({rep.config, rep.state_ineq, rep.input_ineq, rep.intersection_ineq,
                                             rep.state_eq, rep.input_eq, rep.intersection_eq, rep.cover})));
    }
  }
  return sol;
}

PdRciSolution synthesize_quasi_lpv(SynthesisSpec spec) {
  spec.fix_Y_zero = true;
  return synthesize(spec);
}

bool CertificateReport::ok(double eq_tol) const {
  return config <= eq_tol && state_ineq <= eq_tol && state_eq <= eq_tol && input_ineq <= eq_tol &&
         input_eq <= eq_tol && intersection_ineq <= eq_tol && intersection_eq <= eq_tol &&
         multiplier_min >= -eq_tol && gamma_structure <= eq_tol && lmi_min_eig >= -eq_tol && cover <= eq_tol;
}

CertificateReport replay_certificate(const PdRciSolution& sol, const SynthesisSpec& spec) {
  const LpvProblem& prob = spec.problem;
  const LpvSystem& sys = prob.sys();
  const ConfiguredTemplate& tm = spec.tmpl;
  const MatrixXd& hx = prob.X().A();
  const MatrixXd& hu = prob.U().A();
  const MatrixXd& hp = prob.P().A();
  const VectorXd& hpb = prob.P().b();
  const PPlusData pplus = build_pplus(prob.P(), prob.R());
  const MatrixXd tmap = parameter_hull_map(prob);
  const auto& mult = sol.multipliers;

  CertificateReport rep;
  rep.config = check_configuration(tm, sol.y0);
  for (int j = 0; j < sys.s(); ++j) rep.config = std::max(rep.config, check_configuration(tm, sol.Y.col(j)));

  double mmin = std::min(mult.Q.size() ? mult.Q.minCoeff() : 0.0, 0.0);
  rep.state_ineq = rep.state_eq = rep.input_ineq = rep.input_eq = -INFINITY;
  for (int k = 0; k < tm.N(); ++k) {
    const MatrixXd hv = hx * tm.V[k];
    rep.state_ineq = std::max(rep.state_ineq, (hv * sol.y0 + mult.Lambda[k] * hpb - prob.X().b()).maxCoeff());
    rep.state_eq = std::max(rep.state_eq, (mult.Lambda[k] * hp - hv * sol.Y).cwiseAbs().maxCoeff());
    rep.input_ineq = std::max(rep.input_ineq, (hu * sol.u0[k] + mult.M[k] * hpb - prob.U().b()).maxCoeff());
    rep.input_eq = std::max(rep.input_eq, (mult.M[k] * hp - hu * sol.U[k]).cwiseAbs().maxCoeff());
    mmin = std::min({mmin, mult.Lambda[k].minCoeff(), mult.M[k].minCoeff()});
  }
  rep.intersection_ineq = (sol.y_inner + mult.Q * pplus.h_pdelta - sol.y0).maxCoeff();
  MatrixXd target(tm.ms(), 2 * sys.s());
  target << sol.Y_inner - sol.Y, -sol.Y;
  rep.intersection_eq = (mult.Q * pplus.H_pdelta - target).cwiseAbs().maxCoeff();

  rep.lmi_min_eig = INFINITY;
  rep.gamma_structure = 0.0;
  for (int k = 0; k < tm.N(); ++k) {
    for (int i = 0; i < tm.ms(); ++i) {
      const MatrixXd& g = mult.Gamma[k * tm.ms() + i];
      mmin = std::min(mmin, g.minCoeff());
      rep.gamma_structure = std::max({rep.gamma_structure, (g - g.transpose()).cwiseAbs().maxCoeff(),
                                      g.diagonal().cwiseAbs().maxCoeff()});
      // Build G without the structural check so that replay reports instead of throwing.
      const auto s = hp.cols();
      MatrixXd gm(s + 1, s + 1);
      gm.topLeftCorner(s, s) = hp.transpose() * g * hp;
      gm.topRightCorner(s, 1) = -hp.transpose() * g * hpb;
      gm.bottomLeftCorner(1, s) = gm.topRightCorner(s, 1).transpose();
      gm(s, s) = hpb.dot(g * hpb);
      const MatrixXd f = build_F(sol.y0, sol.Y, sol.u0[k], sol.U[k], sol.y_inner, sol.Y_inner,
                                 build_M_ik(tm, sys, i, k), sol.d(i), i);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(tmap.transpose() * (f - gm) * tmap, Eigen::EigenvaluesOnly);
      rep.lmi_min_eig = std::min(rep.lmi_min_eig, es.eigenvalues()(0));
    }
  }
  rep.multiplier_min = mmin;

  // Cover: the LP distance at each sample must not exceed the reported eps.
  rep.cover = -INFINITY;
  for (std::size_t j = 0; j < spec.sampled_params.size(); ++j) {
    const HPolytope sj(tm.C, sol.y0 + sol.Y * spec.sampled_params[j]);
    const DistanceResult dr = distance_metric_detail(sj, spec.X_vertices, spec.D);
    rep.cover = std::max(rep.cover, dr.value - sol.eps[j].sum());
  }
  return rep;
}

}  // namespace pdrci
