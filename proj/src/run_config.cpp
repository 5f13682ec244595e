#include "pdrci/run_config.hpp"

#include <filesystem>

#include "pdrci/mrci.hpp"

namespace pdrci {

namespace {

std::string resolve(const RunConfig& cfg, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(cfg.base_dir) / p).string();
}

const Json& require(const Json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kInvalidInput, std::string(where) + ": missing '" + key + "'");
  }
  return j.at(key);
}

}  // namespace

RunConfig load_run_config(const std::string& path, std::optional<double> kappa) {
  RunConfig cfg;
  cfg.raw = read_json(path);
  cfg.base_dir = std::filesystem::path(path).parent_path().string();
  if (cfg.base_dir.empty()) cfg.base_dir = ".";
  cfg.problem = model_from_json(read_json(resolve(cfg, require(cfg.raw, "model", "config").get<std::string>())));
  cfg.seed = cfg.raw.value("seed", std::uint64_t{1});
  cfg.quasi_lpv = cfg.raw.value("quasi_lpv", false);
  cfg.allow_nonsimple = cfg.raw.value("allow_nonsimple", false);
  if (!kappa && cfg.raw.contains("kappa")) kappa = cfg.raw["kappa"].get<double>();
  if (kappa) {
    if (*kappa < 0.0) throw Error(ErrorCode::kInvalidInput, "kappa must be nonnegative");
    const int s = cfg.problem.sys().s();
    cfg.problem = cfg.problem.with_rate_bound(HPolytope::symmetric_box(VectorXd::Constant(s, *kappa)));
  }
  return cfg;
}

TemplateBuild build_configured_template(const RunConfig& cfg) {
  const Json& spec = require(cfg.raw, "template", "config");
  const std::string kind = require(spec, "kind", "template").get<std::string>();
  TemplateOptions topts;
  topts.allow_nonsimple = cfg.allow_nonsimple;
  TemplateBuild out;
  if (kind == "mrci") {
    const HPolytope set = mrci(cfg.problem);
    out.tmpl = build_template(set.A(), set.b(), topts);
  } else if (kind == "uniform_polygon") {
    out.tmpl = build_template(uniform_polygon(require(spec, "m", "template").get<int>()), topts);
  } else if (kind == "matrix") {
    const MatrixXd c = matrix_from_json(require(spec, "C", "template"));
    out.tmpl = spec.contains("sigma") ? build_template(c, vector_from_json(spec["sigma"]), topts)
                                      : build_template(c, topts);
  } else if (kind == "init_nlp") {
    out.c_hat = matrix_from_json(require(spec, "C_hat", "template"));
    InitOptions iopts;
    if (spec.contains("D")) iopts.D = matrix_from_json(spec["D"]);
    iopts.max_iter = spec.value("max_iter", iopts.max_iter);
    out.init = init_template(out.c_hat, cfg.problem, iopts);
    out.W = out.init->W;
    out.tmpl = build_template(out.c_hat * out.init->M, topts);
  } else if (kind == "fixed_W") {
    out.c_hat = matrix_from_json(require(spec, "C_hat", "template"));
    out.W = matrix_from_json(require(spec, "W", "template"));
    if (out.W.rows() != out.c_hat.cols() || out.W.cols() != out.c_hat.cols()) {
      throw Error(ErrorCode::kShapeMismatch, "template: W must be n x n");
    }
    out.tmpl = build_template(out.c_hat * out.W.inverse(), topts);
  } else if (kind == "file") {
    out = template_build_from_json(read_json(resolve(cfg, require(spec, "path", "template").get<std::string>())));
  } else {
    throw Error(ErrorCode::kInvalidInput, "unknown template kind '" + kind + "'");
  }
  if (out.tmpl.n() != cfg.problem.sys().n()) throw Error(ErrorCode::kShapeMismatch, "template: wrong state dimension");
  return out;
}

MatrixXd distance_template(const RunConfig& cfg, const ConfiguredTemplate& tmpl) {
  if (!cfg.raw.contains("D")) return tmpl.C;
  const Json& spec = cfg.raw["D"];
  const std::string kind = require(spec, "kind", "D").get<std::string>();
  if (kind == "C") return tmpl.C;
  if (kind == "matrix") return matrix_from_json(require(spec, "value", "D"));
  if (kind == "uniform_polygon") return uniform_polygon(require(spec, "m", "D").get<int>());
  throw Error(ErrorCode::kInvalidInput, "unknown D kind '" + kind + "'");
}

SynthesisSpec synthesis_spec(const RunConfig& cfg, const ConfiguredTemplate& tmpl) {
  SynthesisSpec spec = make_synthesis_spec(cfg.problem, tmpl, distance_template(cfg, tmpl));
  if (cfg.raw.contains("samples")) {
    const Json& s = cfg.raw["samples"];
    const std::string kind = require(s, "kind", "samples").get<std::string>();
    if (kind == "list") {
      spec.sampled_params.clear();
      for (const auto& p : require(s, "values", "samples")) spec.sampled_params.push_back(vector_from_json(p));
    } else if (kind != "P_vertices") {
      throw Error(ErrorCode::kInvalidInput, "unknown samples kind '" + kind + "'");
    }
  }
  return spec;
}

PdRciSolution run_synthesis(const RunConfig& cfg, const ConfiguredTemplate& tmpl) {
  SynthesisSpec spec = synthesis_spec(cfg, tmpl);
  return cfg.quasi_lpv ? synthesize_quasi_lpv(std::move(spec)) : synthesize(spec);
}

std::vector<VectorXd> dtot_params(const RunConfig& cfg) {
  const Json& spec = require(cfg.raw, "dtot", "config");
  const VectorXd from = vector_from_json(require(spec, "from", "dtot"));
  const VectorXd to = vector_from_json(require(spec, "to", "dtot"));
  const int count = require(spec, "count", "dtot").get<int>();
  if (count < 1 || from.size() != to.size()) throw Error(ErrorCode::kInvalidInput, "dtot: bad segment");
  std::vector<VectorXd> out;
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
    out.push_back((1.0 - t) * from + t * to);
  }
  return out;
}

Json template_build_to_json(const TemplateBuild& build) {
  Json out = to_json(build.tmpl);
  if (build.c_hat.size() > 0) out["C_hat"] = to_json(build.c_hat);
  if (build.W.size() > 0) out["W"] = to_json(build.W);
  if (build.init) out["init"] = to_json(*build.init, build.c_hat);
  return out;
}

TemplateBuild template_build_from_json(const Json& j) {
  TemplateBuild out;
  out.tmpl = template_from_json(j);
  if (j.contains("C_hat")) out.c_hat = matrix_from_json(j["C_hat"]);
  if (j.contains("W")) out.W = matrix_from_json(j["W"]);
  return out;
}

}  // namespace pdrci
