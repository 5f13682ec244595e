#include "pdrci/conic_solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace pdrci::conic {

int Cones::dimension() const {
  int dim = nonneg;
  for (int k : psd) dim += svec_size(k);
  return dim;
}

int Cones::degree() const {
  int deg = nonneg;
  for (int k : psd) deg += k;
  return deg;
}

std::string to_string(Status status) {
  switch (status) {
    case Status::kOptimal: return "optimal";
    case Status::kPrimalInfeasible: return "primal_infeasible";
    case Status::kDualInfeasible: return "dual_infeasible";
    case Status::kMaxIterations: return "max_iterations";
    case Status::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

Eigen::VectorXd svec(const Eigen::MatrixXd& m) {
  const int k = static_cast<int>(m.rows());
  Eigen::VectorXd v(svec_size(k));
  int pos = 0;
  for (int j = 0; j < k; ++j) {
    for (int i = j; i < k; ++i) {
      v(pos++) = (i == j) ? m(i, j) : M_SQRT2 * 0.5 * (m(i, j) + m(j, i));
    }
  }
  return v;
}

Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v, int order) {
  Eigen::MatrixXd m(order, order);
  int pos = 0;
  for (int j = 0; j < order; ++j) {
    for (int i = j; i < order; ++i) {
      const double val = (i == j) ? v(pos) : v(pos) / M_SQRT2;
      m(i, j) = val;
      m(j, i) = val;
      ++pos;
    }
  }
  return m;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Layout {
  int nonneg = 0;
  std::vector<int> order;
  std::vector<int> offset;
  int dim = 0;

  explicit Layout(const Cones& cones) : nonneg(cones.nonneg), order(cones.psd) {
    int pos = nonneg;
    for (int k : order) {
      offset.push_back(pos);
      pos += svec_size(k);
    }
    dim = pos;
  }
  int blocks() const { return static_cast<int>(order.size()); }
};

// Nesterov-Todd scaling point. The scaled variable is
//   lambda = W z = W^{-T} s,
// with W = diag(d) on the orthant and W(U) = R' U R on semidefinite blocks.
struct Scaling {
  VectorXd d;
  VectorXd lambda_lp;
  std::vector<MatrixXd> r;
  std::vector<MatrixXd> r_inv;
  std::vector<VectorXd> lambda_psd;
  std::vector<MatrixXd> hessian;  // svec matrix of U -> W'W(U)
};

double block_dot(const VectorXd& a, const VectorXd& b) { return a.dot(b); }

// Smallest eigenvalue of a symmetric matrix in svec form.
double min_eig(const VectorXd& v, int order) {
  if (order == 1) return v(0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(v, order), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Largest alpha with u + alpha * e in the interior, returned as the
// most negative "eigenvalue" of u (positive means u is outside the cone).
double cone_violation(const Layout& layout, const VectorXd& u) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < layout.nonneg; ++i) worst = std::max(worst, -u(i));
  for (int b = 0; b < layout.blocks(); ++b) {
    const int k = layout.order[b];
    worst = std::max(worst, -min_eig(u.segment(layout.offset[b], svec_size(k)), k));
  }
  return worst;
}

void add_identity(const Layout& layout, double alpha, VectorXd& u) {
  for (int i = 0; i < layout.nonneg; ++i) u(i) += alpha;
  for (int b = 0; b < layout.blocks(); ++b) {
    const int k = layout.order[b];
    for (int j = 0; j < k; ++j) u(layout.offset[b] + svec_index(k, j, j)) += alpha;
  }
}

VectorXd identity_vec(const Layout& layout) {
  VectorXd e = VectorXd::Zero(layout.dim);
  add_identity(layout, 1.0, e);
  return e;
}

bool compute_scaling(const Layout& layout, const VectorXd& s, const VectorXd& z,
                     Scaling& w) {
  const int l = layout.nonneg;
  w.d.resize(l);
  w.lambda_lp.resize(l);
  for (int i = 0; i < l; ++i) {
    if (!(s(i) > 0.0) || !(z(i) > 0.0)) return false;
    w.d(i) = std::sqrt(s(i) / z(i));
    w.lambda_lp(i) = std::sqrt(s(i) * z(i));
  }
  const int nb = layout.blocks();
  w.r.resize(nb);
  w.r_inv.resize(nb);
  w.lambda_psd.resize(nb);
  w.hessian.resize(nb);
  for (int b = 0; b < nb; ++b) {
    const int k = layout.order[b];
    const int off = layout.offset[b];
    const MatrixXd sm = smat(s.segment(off, svec_size(k)), k);
    const MatrixXd zm = smat(z.segment(off, svec_size(k)), k);
    Eigen::LLT<MatrixXd> ls(sm), lz(zm);
    if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
    const MatrixXd l_s = ls.matrixL();
    const MatrixXd l_z = lz.matrixL();
    Eigen::JacobiSVD<MatrixXd> svd(l_z.transpose() * l_s, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd sig = svd.singularValues();
    if (sig.minCoeff() <= 0.0) return false;
    const VectorXd inv_sqrt = sig.array().rsqrt();
    // R = L_s V diag(sig)^{-1/2};  R^{-1} = diag(sig)^{-1/2} U' L_z'.
    w.r[b] = l_s * svd.matrixV() * inv_sqrt.asDiagonal();
    w.r_inv[b] = inv_sqrt.asDiagonal() * svd.matrixU().transpose() * l_z.transpose();
    w.lambda_psd[b] = sig;
    const MatrixXd wnt = w.r[b] * w.r[b].transpose();
    const int sz = svec_size(k);
    MatrixXd hm(sz, sz);
    VectorXd unit = VectorXd::Zero(sz);
    for (int c = 0; c < sz; ++c) {
      unit.setZero();
      unit(c) = 1.0;
      const MatrixXd um = smat(unit, k);
      hm.col(c) = svec(wnt * um * wnt);
    }
    w.hessian[b] = 0.5 * (hm + hm.transpose());
  }
  return true;
}

enum class Map { kW, kWt, kWinv, kWinvT };

VectorXd apply(const Layout& layout, const Scaling& w, Map map, const VectorXd& v) {
  VectorXd out(layout.dim);
  const int l = layout.nonneg;
  for (int i = 0; i < l; ++i) {
    const bool mult = (map == Map::kW || map == Map::kWt);
    out(i) = mult ? w.d(i) * v(i) : v(i) / w.d(i);
  }
  for (int b = 0; b < layout.blocks(); ++b) {
    const int k = layout.order[b];
    const int off = layout.offset[b];
    const MatrixXd vm = smat(v.segment(off, svec_size(k)), k);
    MatrixXd res;
    switch (map) {
      case Map::kW: res = w.r[b].transpose() * vm * w.r[b]; break;
      case Map::kWt: res = w.r[b] * vm * w.r[b].transpose(); break;
      case Map::kWinv: res = w.r_inv[b].transpose() * vm * w.r_inv[b]; break;
      case Map::kWinvT: res = w.r_inv[b] * vm * w.r_inv[b].transpose(); break;
    }
    out.segment(off, svec_size(k)) = svec(res);
  }
  return out;
}

VectorXd lambda_vec(const Layout& layout, const Scaling& w) {
  VectorXd lam = VectorXd::Zero(layout.dim);
  lam.head(layout.nonneg) = w.lambda_lp;
  for (int b = 0; b < layout.blocks(); ++b) {
    const int k = layout.order[b];
    for (int j = 0; j < k; ++j) lam(layout.offset[b] + svec_index(k, j, j)) = w.lambda_psd[b](j);
  }
  return lam;
}

// Jordan product u o v.
VectorXd jordan(const Layout& layout, const VectorXd& u, const VectorXd& v) {
  VectorXd out(layout.dim);
  out.head(layout.nonneg) = u.head(layout.nonneg).cwiseProduct(v.head(layout.nonneg));
  for (int b = 0; b < layout.blocks(); ++b) {
    const int k = layout.order[b];
    const int off = layout.offset[b];
    const MatrixXd um = smat(u.segment(off, svec_size(k)), k);
    const MatrixXd vm = smat(v.segment(off, svec_size(k)), k);
    out.segment(off, svec_size(k)) = svec(0.5 * (um * vm + vm * um));
  }
  return out;
}

// Solves lambda o x = v for x (lambda is diagonal in the scaled frame).
VectorXd lambda_divide(const Layout& layout, const Scaling& w, const VectorXd& v) {
  VectorXd out(layout.dim);
  out.head(layout.nonneg) = v.head(layout.nonneg).cwiseQuotient(w.lambda_lp);
  for (int b = 0; b < layout.blocks(); ++b) {
    const int k = layout.order[b];
    const int off = layout.offset[b];
    const VectorXd& lam = w.lambda_psd[b];
    for (int j = 0; j < k; ++j) {
      for (int i = j; i < k; ++i) {
        const int pos = off + svec_index(k, i, j);
        out(pos) = 2.0 * v(pos) / (lam(i) + lam(j));
      }
    }
  }
  return out;
}

// Largest step alpha such that lambda + alpha * dir stays in the cone, where
// dir is expressed in the scaled frame.
double max_step_scaled(const Layout& layout, const Scaling& w, const VectorXd& dir) {
  double alpha = std::numeric_limits<double>::infinity();
  for (int i = 0; i < layout.nonneg; ++i) {
    if (dir(i) < 0.0) alpha = std::min(alpha, -w.lambda_lp(i) / dir(i));
  }
  for (int b = 0; b < layout.blocks(); ++b) {
    const int k = layout.order[b];
    const int off = layout.offset[b];
    const VectorXd isq = w.lambda_psd[b].array().rsqrt();
    const MatrixXd dm = isq.asDiagonal() * smat(dir.segment(off, svec_size(k)), k) * isq.asDiagonal();
    double mn;
    if (k == 1) {
      mn = dm(0, 0);
    } else {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(dm, Eigen::EigenvaluesOnly);
      mn = es.eigenvalues()(0);
    }
    if (mn < 0.0) alpha = std::min(alpha, -1.0 / mn);
  }
  return alpha;
}

// Regularized KKT system
//   [ reg I    A'      G'         ]
//   [ A       -reg I   0          ]
//   [ G        0      -(H + reg I)]
// factored with a sparse LDL' decomposition. Iterative refinement is done
// against the unregularized operator.
class KktSystem {
 public:
  KktSystem(const Problem& prob, const Layout& layout, double reg)
      : prob_(prob), layout_(layout), reg_base_(reg), reg_(reg) {
    n_ = static_cast<int>(prob.c.size());
    p_ = static_cast<int>(prob.b.size());
    m_ = layout.dim;
    const int dim = n_ + p_ + m_;
    std::vector<Triplet> trip;
    trip.reserve(prob.A.nonZeros() + prob.G.nonZeros() + dim + 16 * layout.blocks() * 10);
    for (int j = 0; j < n_; ++j) trip.emplace_back(j, j, 1.0);
    for (int j = 0; j < p_; ++j) trip.emplace_back(n_ + j, n_ + j, -1.0);
    for (int k = 0; k < prob.A.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(prob.A, k); it; ++it) {
        trip.emplace_back(n_ + it.row(), it.col(), it.value());
      }
    }
    for (int k = 0; k < prob.G.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(prob.G, k); it; ++it) {
        trip.emplace_back(n_ + p_ + it.row(), it.col(), it.value());
      }
    }
    const int zoff = n_ + p_;
    for (int i = 0; i < layout.nonneg; ++i) trip.emplace_back(zoff + i, zoff + i, -1.0);
    for (int b = 0; b < layout.blocks(); ++b) {
      const int sz = svec_size(layout.order[b]);
      const int off = zoff + layout.offset[b];
      for (int c = 0; c < sz; ++c) {
        for (int r = c; r < sz; ++r) trip.emplace_back(off + r, off + c, -1.0);
      }
    }
    kkt_.resize(dim, dim);
    kkt_.setFromTriplets(trip.begin(), trip.end());
    kkt_.makeCompressed();
    // Overwrite A/G values (setFromTriplets summed nothing for them, but the
    // diagonal placeholders need to be located for updates).
    auto locate = [&](int row, int col) {
      const int* inner = kkt_.innerIndexPtr();
      const int begin = kkt_.outerIndexPtr()[col];
      const int end = kkt_.outerIndexPtr()[col + 1];
      const int* it = std::lower_bound(inner + begin, inner + end, row);
      return static_cast<int>(it - inner);
    };
    for (int j = 0; j < n_; ++j) diag_x_.push_back(locate(j, j));
    for (int j = 0; j < p_; ++j) diag_y_.push_back(locate(n_ + j, n_ + j));
    for (int i = 0; i < layout.nonneg; ++i) lp_pos_.push_back(locate(zoff + i, zoff + i));
    for (int b = 0; b < layout.blocks(); ++b) {
      const int sz = svec_size(layout.order[b]);
      const int off = zoff + layout.offset[b];
      std::vector<int> pos;
      for (int c = 0; c < sz; ++c) {
        for (int r = c; r < sz; ++r) pos.push_back(locate(off + r, off + c));
      }
      psd_pos_.push_back(std::move(pos));
    }
    solver_.analyzePattern(kkt_);
  }

  // Retries with a larger static regularization when a pivot vanishes;
  // refinement against the exact operator recovers the accuracy.
  bool factor(const Scaling& w) {
    for (double reg = reg_base_; reg <= 1e-3; reg *= 100.0) {
      reg_ = reg;
      if (factor_with(w)) return true;
    }
    reg_ = reg_base_;
    return false;
  }

  double regularization() const { return reg_; }

 private:
  bool factor_with(const Scaling& w) {
    scaling_ = &w;
    double* val = kkt_.valuePtr();
    for (int j = 0; j < n_; ++j) val[diag_x_[j]] = reg_;
    for (int j = 0; j < p_; ++j) val[diag_y_[j]] = -reg_;
    for (int i = 0; i < layout_.nonneg; ++i) val[lp_pos_[i]] = -(w.d(i) * w.d(i) + reg_);
    for (int b = 0; b < layout_.blocks(); ++b) {
      const int sz = svec_size(layout_.order[b]);
      const MatrixXd& hm = w.hessian[b];
      int idx = 0;
      for (int c = 0; c < sz; ++c) {
        for (int r = c; r < sz; ++r) {
          val[psd_pos_[b][idx++]] = -(hm(r, c) + (r == c ? reg_ : 0.0));
        }
      }
    }
    solver_.factorize(kkt_);
    return solver_.info() == Eigen::Success;
  }

 public:

  // Solves the unregularized system for (x, y, z).
  void solve(const VectorXd& rx, const VectorXd& ry, const VectorXd& rz, int refine,
             VectorXd& x, VectorXd& y, VectorXd& z) const {
    VectorXd rhs(n_ + p_ + m_);
    rhs << rx, ry, rz;
    VectorXd sol = solver_.solve(rhs);
    const double rhs_norm = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
    const int steps = reg_ > reg_base_ ? std::max(refine, 10) : refine;
    for (int it = 0; it < steps; ++it) {
      const VectorXd res = rhs - apply_kkt(sol);
      if (res.lpNorm<Eigen::Infinity>() <= 1e-14 * rhs_norm) break;
      sol += solver_.solve(res);
    }
    x = sol.head(n_);
    y = sol.segment(n_, p_);
    z = sol.tail(m_);
  }

 private:
  VectorXd apply_kkt(const VectorXd& u) const {
    const VectorXd ux = u.head(n_);
    const VectorXd uy = u.segment(n_, p_);
    const VectorXd uz = u.tail(m_);
    VectorXd out(n_ + p_ + m_);
    out.head(n_) = prob_.A.transpose() * uy + prob_.G.transpose() * uz;
    out.segment(n_, p_) = prob_.A * ux;
    VectorXd hz(m_);
    const Scaling& w = *scaling_;
    hz.head(layout_.nonneg) = w.d.array().square() * uz.head(layout_.nonneg).array();
    for (int b = 0; b < layout_.blocks(); ++b) {
      const int sz = svec_size(layout_.order[b]);
      const int off = layout_.offset[b];
      hz.segment(off, sz) = w.hessian[b] * uz.segment(off, sz);
    }
    out.tail(m_) = prob_.G * ux - hz;
    return out;
  }

  const Problem& prob_;
  const Layout& layout_;
  double reg_base_;
  double reg_;
  int n_ = 0, p_ = 0, m_ = 0;
  SparseMatrix kkt_;
  std::vector<int> diag_x_, diag_y_, lp_pos_;
  std::vector<std::vector<int>> psd_pos_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> solver_;
  const Scaling* scaling_ = nullptr;
};

void check_shapes(const Problem& prob) {
  const auto n = prob.c.size();
  const bool ok = prob.A.cols() == n && prob.G.cols() == n && prob.A.rows() == prob.b.size() &&
                  prob.G.rows() == prob.h.size() && prob.G.rows() == prob.cones.dimension();
  if (!ok) throw std::invalid_argument("conic::solve: inconsistent problem dimensions");
}

Result solve_scaled(const Problem& prob, const Settings& settings) {
  const Layout layout(prob.cones);
  const int n = static_cast<int>(prob.c.size());
  const int p = static_cast<int>(prob.b.size());
  const int m = layout.dim;
  const double degree = prob.cones.degree();

  KktSystem kkt(prob, layout, settings.static_reg);
  Result result;

  // Starting point: least-norm primal and dual solutions with W = I.
  Scaling w;
  {
    VectorXd ones = identity_vec(layout);
    compute_scaling(layout, ones, ones, w);
  }
  if (!kkt.factor(w)) {
    result.status = Status::kNumericalFailure;
    return result;
  }
  VectorXd x, y, z, s, tmp_x, tmp_y;
  kkt.solve(VectorXd::Zero(n), prob.b, prob.h, settings.refine_steps, x, tmp_y, z);
  s = -z;
  kkt.solve(-prob.c, VectorXd::Zero(p), VectorXd::Zero(m), settings.refine_steps, tmp_x, y, z);
  {
    const double as = cone_violation(layout, s);
    if (as >= -1e-8 * std::max(1.0, s.norm())) add_identity(layout, 1.0 + as, s);
    const double az = cone_violation(layout, z);
    if (az >= -1e-8 * std::max(1.0, z.norm())) add_identity(layout, 1.0 + az, z);
  }
  double tau = 1.0, kappa = 1.0;

  const double resx0 = std::max(1.0, prob.c.norm());
  const double resy0 = std::max(1.0, prob.b.norm());
  const double resz0 = std::max(1.0, prob.h.norm());

  const VectorXd e = identity_vec(layout);
  VectorXd wx, wy, wz;
  Result best;
  double best_merit = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter <= settings.max_iter; ++iter) {
    result.iterations = iter;
    const VectorXd rx = prob.A.transpose() * y + prob.G.transpose() * z + prob.c * tau;
    const VectorXd ry = prob.A * x - prob.b * tau;
    const VectorXd rz = prob.G * x + s - prob.h * tau;
    const double cx = prob.c.dot(x);
    const double by_hz = prob.b.dot(y) + prob.h.dot(z);
    const double rt = kappa + cx + by_hz;
    const double gap = block_dot(s, z);
    const double mu = (gap + tau * kappa) / (degree + 1.0);

    const double pcost = cx / tau;
    const double dcost = -by_hz / tau;
    const double pres = std::max(ry.norm() / resy0, rz.norm() / resz0) / tau;
    const double dres = rx.norm() / resx0 / tau;
    const double gap_n = gap / (tau * tau);
    double relgap = std::numeric_limits<double>::infinity();
    if (pcost < 0.0) relgap = gap_n / -pcost;
    else if (dcost > 0.0) relgap = gap_n / dcost;
    const double pinfres =
        by_hz < 0.0 ? (prob.A.transpose() * y + prob.G.transpose() * z).norm() / resx0 / -by_hz
                    : std::numeric_limits<double>::infinity();
    const double dinfres =
        cx < 0.0 ? std::max((prob.A * x).norm() / resy0, (prob.G * x + s).norm() / resz0) / -cx
                 : std::numeric_limits<double>::infinity();

    if (settings.verbose) {
      std::fprintf(stderr, "%3d  % .8e  % .8e  %.2e  %.2e  %.2e  tau=%.2e kappa=%.2e\n", iter,
                   pcost, dcost, gap_n, pres, dres, tau, kappa);
    }
    result.pcost = pcost;
    result.dcost = dcost;
    result.gap = gap_n;
    result.pres = pres;
    result.dres = dres;
    // Keep the iterate with the smallest worst-case residual in case the method stalls.
    const double merit = std::max({pres, dres, gap_n / (1.0 + std::abs(pcost))});
    if (merit < best_merit) {
      best_merit = merit;
      best = result;
      best.x = x / tau;
      best.y = y / tau;
      best.z = z / tau;
      best.s = s / tau;
    }

    if (pres <= settings.feastol && dres <= settings.feastol &&
        (gap_n <= settings.abstol || relgap <= settings.reltol)) {
      result.status = Status::kOptimal;
      result.x = x / tau;
      result.y = y / tau;
      result.z = z / tau;
      result.s = s / tau;
      return result;
    }
    if (pinfres <= settings.feastol) {
      result.status = Status::kPrimalInfeasible;
      result.x = x;
      result.y = y / -by_hz;
      result.z = z / -by_hz;
      result.s = s;
      return result;
    }
    if (dinfres <= settings.feastol) {
      result.status = Status::kDualInfeasible;
      result.x = x / -cx;
      result.s = s / -cx;
      result.y = y;
      result.z = z;
      return result;
    }
    if (iter == settings.max_iter) break;

    if (!compute_scaling(layout, s, z, w)) {
      if (settings.verbose) std::fprintf(stderr, "scaling failed: iterates left the cone interior\n");
      result.status = Status::kNumericalFailure;
      break;
    }
    if (!kkt.factor(w)) {
      if (settings.verbose) std::fprintf(stderr, "KKT factorization failed\n");
      result.status = Status::kNumericalFailure;
      break;
    }
    const VectorXd lambda = lambda_vec(layout, w);
    const VectorXd lambda_sq = jordan(layout, lambda, lambda);

    kkt.solve(prob.c, -prob.b, -prob.h, settings.refine_steps, wx, wy, wz);
    const double wden = prob.c.dot(wx) + prob.b.dot(wy) + prob.h.dot(wz);

    VectorXd dx, dy, dz, ds;
    double dtau = 0.0, dkappa = 0.0;
    VectorXd ds_aff_scaled, dz_aff_scaled;
    double dtau_aff = 0.0, dkappa_aff = 0.0;
    double sigma = 0.0;
    double step = 0.0;

    for (int pass = 0; pass < 2; ++pass) {
      const double eta = pass == 0 ? 0.0 : sigma;
      VectorXd d_s = -lambda_sq;
      double d_kappa = -tau * kappa;
      if (pass == 1) {
        d_s += -jordan(layout, ds_aff_scaled, dz_aff_scaled) + sigma * mu * e;
        d_kappa += -dtau_aff * dkappa_aff + sigma * mu;
      }
      const VectorXd lds = lambda_divide(layout, w, d_s);  // lambda \ d_s
      const VectorXd wt_lds = apply(layout, w, Map::kWt, lds);
      const VectorXd bx = -(1.0 - eta) * rx;
      const VectorXd by = -(1.0 - eta) * ry;
      const VectorXd bz = -(1.0 - eta) * rz - wt_lds;
      const double bt = -(1.0 - eta) * rt - d_kappa / tau;
      VectorXd vx, vy, vz;
      kkt.solve(bx, by, bz, settings.refine_steps, vx, vy, vz);
      dtau = (prob.c.dot(vx) + prob.b.dot(vy) + prob.h.dot(vz) - bt) / (wden + kappa / tau);
      dx = vx - dtau * wx;
      dy = vy - dtau * wy;
      dz = vz - dtau * wz;
      dkappa = (d_kappa - kappa * dtau) / tau;
      // W^{-T} ds = lambda \ d_s - W dz
      const VectorXd dz_scaled = apply(layout, w, Map::kW, dz);
      const VectorXd ds_scaled = lds - dz_scaled;
      ds = apply(layout, w, Map::kWt, ds_scaled);

      double amax = std::min(max_step_scaled(layout, w, ds_scaled),
                             max_step_scaled(layout, w, dz_scaled));
      if (dtau < 0.0) amax = std::min(amax, -tau / dtau);
      if (dkappa < 0.0) amax = std::min(amax, -kappa / dkappa);
      if (pass == 0) {
        const double aff = std::min(1.0, amax);
        sigma = std::pow(1.0 - aff, 3);
        ds_aff_scaled = ds_scaled;
        dz_aff_scaled = dz_scaled;
        dtau_aff = dtau;
        dkappa_aff = dkappa;
      } else {
        step = std::min(1.0, 0.99 * amax);
      }
    }

    if (!(step > 1e-12) || !std::isfinite(step)) {
      if (settings.verbose) std::fprintf(stderr, "step length collapsed (%g)\n", step);
      result.status = Status::kNumericalFailure;
      break;
    }
    x += step * dx;
    y += step * dy;
    z += step * dz;
    s += step * ds;
    tau += step * dtau;
    kappa += step * dkappa;
  }

  const Status stop = result.status == Status::kNumericalFailure ? Status::kNumericalFailure : Status::kMaxIterations;
  best.status = stop;
  best.iterations = result.iterations;
  return best;
}

// Ruiz equilibration: x = D x~, rows of A scaled by ea, rows of G by eg with one
// factor per semidefinite block so the cone is preserved.
struct Equilibration {
  VectorXd d, ea, eg;
};

Equilibration equilibrate(const Problem& prob, const Layout& layout, int passes) {
  const int n = static_cast<int>(prob.c.size());
  Equilibration eq{VectorXd::Ones(n), VectorXd::Ones(prob.A.rows()), VectorXd::Ones(prob.G.rows())};
  auto clamp = [](double v) { return std::clamp(v, 1e-4, 1e4); };
  for (int pass = 0; pass < passes; ++pass) {
    VectorXd col = VectorXd::Zero(n), ra = VectorXd::Zero(prob.A.rows()), rg = VectorXd::Zero(prob.G.rows());
    for (int j = 0; j < n; ++j) {
      for (SparseMatrix::InnerIterator it(prob.A, j); it; ++it) {
        const double v = std::abs(it.value() * eq.ea(it.row()) * eq.d(j));
        col(j) = std::max(col(j), v);
        ra(it.row()) = std::max(ra(it.row()), v);
      }
      for (SparseMatrix::InnerIterator it(prob.G, j); it; ++it) {
        const double v = std::abs(it.value() * eq.eg(it.row()) * eq.d(j));
        col(j) = std::max(col(j), v);
        rg(it.row()) = std::max(rg(it.row()), v);
      }
    }
    for (int b = 0; b < layout.blocks(); ++b) {
      auto seg = rg.segment(layout.offset[b], svec_size(layout.order[b]));
      seg.setConstant(seg.maxCoeff());
    }
    for (int j = 0; j < n; ++j) {
      if (col(j) > 0.0) eq.d(j) = clamp(eq.d(j) / std::sqrt(col(j)));
    }
    for (Eigen::Index i = 0; i < ra.size(); ++i) {
      if (ra(i) > 0.0) eq.ea(i) = clamp(eq.ea(i) / std::sqrt(ra(i)));
    }
    for (Eigen::Index i = 0; i < rg.size(); ++i) {
      if (rg(i) > 0.0) eq.eg(i) = clamp(eq.eg(i) / std::sqrt(rg(i)));
    }
  }
  return eq;
}

}  // namespace

Result solve(const Problem& prob, const Settings& settings) {
  check_shapes(prob);
  if (settings.equilibrate_passes <= 0) return solve_scaled(prob, settings);
  const Layout layout(prob.cones);
  const Equilibration eq = equilibrate(prob, layout, settings.equilibrate_passes);
  Problem scaled;
  scaled.c = eq.d.cwiseProduct(prob.c);
  scaled.A = eq.ea.asDiagonal() * prob.A * eq.d.asDiagonal();
  scaled.b = eq.ea.cwiseProduct(prob.b);
  scaled.G = eq.eg.asDiagonal() * prob.G * eq.d.asDiagonal();
  scaled.h = eq.eg.cwiseProduct(prob.h);
  scaled.cones = prob.cones;
  Result r = solve_scaled(scaled, settings);
  if (r.x.size() == eq.d.size()) {
    r.x = eq.d.cwiseProduct(r.x);
    r.y = eq.ea.cwiseProduct(r.y);
    r.z = eq.eg.cwiseProduct(r.z);
    r.s = r.s.cwiseQuotient(eq.eg);
  }
  return r;
}

}  // namespace pdrci::conic
