#include "pdrci/io.hpp"

#include <fstream>
#include <sstream>

namespace pdrci {

namespace {

template <class T, class F>
Json list(const std::vector<T>& items, F&& f) {
  Json out = Json::array();
  for (const auto& item : items) out.push_back(f(item));
  return out;
}

std::vector<MatrixXd> matrices_from_json(const Json& j) {
  std::vector<MatrixXd> out;
  for (const auto& m : j) out.push_back(matrix_from_json(m));
  return out;
}

std::vector<VectorXd> vectors_from_json(const Json& j) {
  std::vector<VectorXd> out;
  for (const auto& v : j) out.push_back(vector_from_json(v));
  return out;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kInvalidInput, std::string("missing JSON field '") + key + "'");
  }
  return j.at(key);
}

}  // namespace

Json to_json(const MatrixXd& m) {
  Json out = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

Json to_json(const VectorXd& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kInvalidInput, "matrix must be a list of rows");
  if (j.empty()) return MatrixXd();
  const size_t cols = j[0].size();
  MatrixXd m(j.size(), cols);
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw Error(ErrorCode::kShapeMismatch, "matrix rows must have equal length");
    }
    for (size_t k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

VectorXd vector_from_json(const Json& j) {
  if (j.is_number()) return VectorXd::Constant(1, j.get<double>());
  if (!j.is_array()) throw Error(ErrorCode::kInvalidInput, "vector must be a list of numbers");
  VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

Json to_json(const HPolytope& p) {
  Json out;
  out["H"] = to_json(p.A());
  out["h"] = to_json(p.b());
  return out;
}

HPolytope polytope_from_json(const Json& j) {
  if (j.contains("H")) return HPolytope(matrix_from_json(j.at("H")), vector_from_json(field(j, "h")));
  if (j.contains("symmetric_box")) return HPolytope::symmetric_box(vector_from_json(j.at("symmetric_box")));
  if (j.contains("box")) {
    const Json& b = j.at("box");
    return HPolytope::box(vector_from_json(field(b, "lower")), vector_from_json(field(b, "upper")));
  }
  if (j.contains("hull")) return hull_hrep(vectors_from_json(j.at("hull")));
  if (j.contains("box_with_sum")) {
    const Json& b = j.at("box_with_sum");
    return HPolytope::box_with_sum(vector_from_json(field(b, "lower")), vector_from_json(field(b, "upper")),
                                   field(b, "total").get<double>());
  }
  if (j.contains("product")) {
    const Json& parts = j.at("product");
    if (!parts.is_array() || parts.empty()) throw Error(ErrorCode::kInvalidInput, "product needs a list of polytopes");
    HPolytope out = polytope_from_json(parts[0]);
    for (size_t i = 1; i < parts.size(); ++i) out = out.cartesian(polytope_from_json(parts[i]));
    return out;
  }
  throw Error(ErrorCode::kInvalidInput, "unrecognized polytope description");
}

Json model_to_json(const LpvData& data) {
  Json out;
  out["n"] = data.sys.n();
  out["m"] = data.sys.m();
  out["s"] = data.sys.s();
  out["A"] = list(data.sys.A(), [](const MatrixXd& m) { return to_json(m); });
  out["B"] = list(data.sys.B(), [](const MatrixXd& m) { return to_json(m); });
  out["X"] = to_json(data.X);
  out["U"] = to_json(data.U);
  out["W"] = to_json(data.W);
  out["P"] = to_json(data.P);
  out["R"] = to_json(data.R);
  out["lift"] = false;
  return out;
}

LpvProblem model_from_json(const Json& j) {
  std::vector<MatrixXd> a = matrices_from_json(field(j, "A"));
  std::vector<MatrixXd> b = matrices_from_json(field(j, "B"));
  for (auto& bj : b) {
    // Single-input models may list B^j as flat column vectors.
    if (bj.rows() == 1 && !a.empty() && a[0].rows() > 1 && bj.cols() == a[0].rows()) bj.transposeInPlace();
  }
  LpvData data{LpvSystem(std::move(a), std::move(b)), polytope_from_json(field(j, "X")),
               polytope_from_json(field(j, "U")), polytope_from_json(field(j, "W")),
               polytope_from_json(field(j, "P")), polytope_from_json(field(j, "R"))};
  if (j.contains("n") && j["n"].get<int>() != data.sys.n()) throw Error(ErrorCode::kShapeMismatch, "model: n disagrees with A");
  if (j.contains("m") && j["m"].get<int>() != data.sys.m()) throw Error(ErrorCode::kShapeMismatch, "model: m disagrees with B");
  if (j.value("lift", false)) return lift_nonnegative(data).problem;
  if (j.contains("s") && j["s"].get<int>() != data.sys.s()) throw Error(ErrorCode::kShapeMismatch, "model: s disagrees with A");
  return LpvProblem(std::move(data));
}

Json to_json(const ConfiguredTemplate& t) {
  Json out;
  out["C"] = to_json(t.C);
  out["sigma"] = to_json(t.seed_sigma);
  out["V"] = list(t.V, [](const MatrixXd& m) { return to_json(m); });
  out["E"] = to_json(t.E);
  out["active_sets"] = t.active_sets;
  return out;
}

ConfiguredTemplate template_from_json(const Json& j) {
  ConfiguredTemplate t;
  t.C = matrix_from_json(field(j, "C"));
  t.seed_sigma = vector_from_json(field(j, "sigma"));
  t.V = matrices_from_json(field(j, "V"));
  t.E = matrix_from_json(field(j, "E"));
  t.active_sets = field(j, "active_sets").get<std::vector<std::vector<int>>>();
  if (t.E.size() == 0) t.E.resize(0, t.ms());
  if (t.seed_sigma.size() != t.ms() || static_cast<int>(t.active_sets.size()) != t.N() || t.E.cols() != t.ms()) {
    throw Error(ErrorCode::kShapeMismatch, "template: C, sigma, V, E and active_sets disagree");
  }
  for (const auto& v : t.V) {
    if (v.rows() != t.n() || v.cols() != t.ms()) throw Error(ErrorCode::kShapeMismatch, "template: V^k must be n x m_s");
  }
  return t;
}

Json to_json(const PdRciSolution& sol) {
  auto mats = [](const std::vector<MatrixXd>& v) { return list(v, [](const MatrixXd& m) { return to_json(m); }); };
  auto vecs = [](const std::vector<VectorXd>& v) { return list(v, [](const VectorXd& x) { return to_json(x); }); };
  Json out;
  out["y0"] = to_json(sol.y0);
  out["Y"] = to_json(sol.Y);
  out["y_inner"] = to_json(sol.y_inner);
  out["Y_inner"] = to_json(sol.Y_inner);
  out["u0"] = vecs(sol.u0);
  out["U"] = mats(sol.U);
  out["eps"] = vecs(sol.eps);
  out["d"] = to_json(sol.d);
  Json mult;
  mult["Lambda"] = mats(sol.multipliers.Lambda);
  mult["M"] = mats(sol.multipliers.M);
  mult["Q"] = to_json(sol.multipliers.Q);
  mult["Gamma"] = mats(sol.multipliers.Gamma);
  out["multipliers"] = std::move(mult);
  Json stats;
  stats["objective"] = sol.stats.objective;
  stats["solver_status"] = sol.stats.solver_status;
  stats["iterations"] = sol.stats.iterations;
  out["stats"] = std::move(stats);
  return out;
}

PdRciSolution solution_from_json(const Json& j) {
  PdRciSolution sol;
  sol.y0 = vector_from_json(field(j, "y0"));
  sol.Y = matrix_from_json(field(j, "Y"));
  sol.y_inner = vector_from_json(field(j, "y_inner"));
  sol.Y_inner = matrix_from_json(field(j, "Y_inner"));
  sol.u0 = vectors_from_json(field(j, "u0"));
  sol.U = matrices_from_json(field(j, "U"));
  sol.eps = vectors_from_json(field(j, "eps"));
  sol.d = vector_from_json(field(j, "d"));
  if (j.contains("multipliers")) {
    const Json& m = j.at("multipliers");
    sol.multipliers.Lambda = matrices_from_json(field(m, "Lambda"));
    sol.multipliers.M = matrices_from_json(field(m, "M"));
    sol.multipliers.Q = matrix_from_json(field(m, "Q"));
    sol.multipliers.Gamma = matrices_from_json(field(m, "Gamma"));
  }
  if (j.contains("stats")) {
    const Json& s = j.at("stats");
    sol.stats.objective = s.value("objective", 0.0);
    sol.stats.solver_status = s.value("solver_status", std::string());
    sol.stats.iterations = s.value("iterations", 0);
  }
  if (sol.Y.rows() != sol.y0.size() || sol.u0.size() != sol.U.size()) {
    throw Error(ErrorCode::kShapeMismatch, "solution: y0, Y, u0 and U disagree");
  }
  return sol;
}

Json to_json(const PiRciResult& r, const MatrixXd& c_hat) {
  Json out;
  out["W"] = to_json(r.W);
  out["M"] = to_json(r.M);
  out["u_vertices"] = list(r.u_vertices, [](const VectorXd& u) { return to_json(u); });
  out["C"] = to_json(MatrixXd(c_hat * r.M));
  out["dist"] = r.dist;
  out["iterations"] = r.iterations;
  out["converged"] = r.converged;
  out["history"] = r.history;
  return out;
}

Json to_json(const VerificationReport& r) {
  Json out;
  out["max_invariance_residual"] = r.max_invariance_residual;
  out["max_config_residual"] = r.max_config_residual;
  out["max_state_residual"] = r.max_state_residual;
  out["max_input_residual"] = r.max_input_residual;
  out["parameter_pairs"] = r.parameter_pairs;
  out["disturbance_vertices"] = r.disturbance_vertices;
  out["tol"] = r.tol;
  Json pass;
  pass["invariance"] = r.invariance_pass;
  pass["config"] = r.config_pass;
  pass["state"] = r.state_pass;
  pass["input"] = r.input_pass;
  out["pass"] = std::move(pass);
  out["all_pass"] = r.pass();
  return out;
}

Json to_json(const InitReplay& r) {
  Json out;
  out["invariance"] = r.invariance;
  out["state"] = r.state;
  out["input"] = r.input;
  out["inverse"] = r.inverse;
  out["worst_z"] = r.worst_z;
  out["worst_p"] = r.worst_p;
  out["worst_w"] = r.worst_w;
  out["ok"] = r.ok();
  return out;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidInput, "cannot write " + path);
  out << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace pdrci
