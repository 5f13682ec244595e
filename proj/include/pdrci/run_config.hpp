#pragma once

// Example bundles: a run configuration names the model file and how to obtain the template,
// the distance template D and the objective samples.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdrci/io.hpp"

namespace pdrci {

struct RunConfig {
  std::string base_dir;  // relative paths in the config resolve against this directory
  Json raw;
  LpvProblem problem;    // with the kappa override applied
  std::uint64_t seed = 1;
  bool quasi_lpv = false;
  bool allow_nonsimple = false;
};

// Reads the config and its model. A kappa override replaces R by kappa times the unit box.
RunConfig load_run_config(const std::string& path, std::optional<double> kappa = {});

struct TemplateBuild {
  ConfiguredTemplate tmpl;
  MatrixXd c_hat;                  // set for the init_nlp and fixed_W kinds
  MatrixXd W;                      // likewise
  std::optional<PiRciResult> init; // set for init_nlp
};

// "template" kinds: mrci, uniform_polygon {m}, matrix {C, sigma?}, init_nlp {C_hat, D?},
// fixed_W {C_hat, W}, file {path}.
TemplateBuild build_configured_template(const RunConfig& cfg);

// "D" kinds: C (default), matrix {value}, uniform_polygon {m}.
MatrixXd distance_template(const RunConfig& cfg, const ConfiguredTemplate& tmpl);

// "samples": P_vertices (default) or list {values}.
SynthesisSpec synthesis_spec(const RunConfig& cfg, const ConfiguredTemplate& tmpl);

// synthesize or synthesize_quasi_lpv, as configured.
PdRciSolution run_synthesis(const RunConfig& cfg, const ConfiguredTemplate& tmpl);

// "dtot": {from, to, count}: count evenly spaced parameters on the segment from -> to.
std::vector<VectorXd> dtot_params(const RunConfig& cfg);

// Template JSON with the init result attached when present.
Json template_build_to_json(const TemplateBuild& build);
TemplateBuild template_build_from_json(const Json& j);

}  // namespace pdrci
