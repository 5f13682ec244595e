#pragma once

// JSON serialization of models, templates, solutions and reports. Objects keep insertion
// order and doubles are written in shortest round-trip form, so equal inputs give equal bytes.

#include <string>

#include <json.hpp>

#include "pdrci/runtime.hpp"
#include "pdrci/template_init.hpp"
#include "pdrci/verify.hpp"

namespace pdrci {

using Json = nlohmann::ordered_json;

Json to_json(const MatrixXd& m);  // list of rows
Json to_json(const VectorXd& v);
MatrixXd matrix_from_json(const Json& j);
VectorXd vector_from_json(const Json& j);

// {"H": rows, "h": offsets}. Reading also accepts one of
//   {"symmetric_box": bound}, {"box": {"lower", "upper"}}, {"hull": points},
//   {"box_with_sum": {"lower", "upper", "total"}}, {"product": [polytope, ...]}.
Json to_json(const HPolytope& p);
HPolytope polytope_from_json(const Json& j);

// {n, m, s, A, B, X, U, W, P, R, lift}. With lift = true, P and R describe P_hat and R_hat and
// the model is lifted to nonnegative parameters with a leading constant coordinate.
Json model_to_json(const LpvData& data);
LpvProblem model_from_json(const Json& j);

// {C, sigma, V, E, active_sets}
Json to_json(const ConfiguredTemplate& t);
ConfiguredTemplate template_from_json(const Json& j);

// Every field of the solution except the wall-clock solve time.
Json to_json(const PdRciSolution& sol);
PdRciSolution solution_from_json(const Json& j);

// {W, M, u_vertices, C = C_hat M, dist, iterations, converged, history}
Json to_json(const PiRciResult& r, const MatrixXd& c_hat);
Json to_json(const VerificationReport& r);
Json to_json(const InitReplay& r);

Json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);
std::string dump(const Json& j);

}  // namespace pdrci
