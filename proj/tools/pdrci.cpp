// Command-line front end: template, synth, simulate, verify, export, sweep-kappa.
// Exit codes: 0 success, 1 verification failure, 2 solver or input failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "pdrci/export.hpp"
#include "pdrci/run_config.hpp"

using namespace pdrci;

namespace {

constexpr int kVerifyFail = 1;
constexpr int kFailure = 2;

struct Common {
  std::string config;
  std::optional<double> kappa;
  std::optional<std::uint64_t> seed;
  std::string template_path;
  std::string solution_path;
};

RunConfig load(const Common& c) {
  RunConfig cfg = load_run_config(c.config, c.kappa);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

TemplateBuild get_template(const Common& c, const RunConfig& cfg) {
  if (!c.template_path.empty()) return template_build_from_json(read_json(c.template_path));
  return build_configured_template(cfg);
}

PdRciSolution get_solution(const Common& c, const RunConfig& cfg, const ConfiguredTemplate& tmpl) {
  if (!c.solution_path.empty()) return solution_from_json(read_json(c.solution_path));
  return run_synthesis(cfg, tmpl);
}

std::vector<VectorXd> config_params(const RunConfig& cfg, const char* section) {
  std::vector<VectorXd> out;
  if (cfg.raw.contains(section) && cfg.raw[section].contains("params")) {
    for (const auto& p : cfg.raw[section]["params"]) out.push_back(vector_from_json(p));
  }
  if (out.empty()) out = cfg.problem.vertices_P().vertices;
  return out;
}

void add_common(CLI::App* app, Common& c, bool with_inputs) {
  app->add_option("-c,--config", c.config, "run configuration JSON")->required()->check(CLI::ExistingFile);
  app->add_option("--kappa", c.kappa, "replace R by kappa times the unit box");
  app->add_option("--seed", c.seed, "random seed (overrides the config)");
  if (with_inputs) {
    app->add_option("--template", c.template_path, "template JSON (built from the config when omitted)")
        ->check(CLI::ExistingFile);
    app->add_option("--solution", c.solution_path, "solution JSON (synthesized when omitted)")
        ->check(CLI::ExistingFile);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameter-dependent RCI set synthesis for LPV systems"};
  app.require_subcommand(1);
  if (const char* threads = std::getenv("PDRCI_THREADS")) Eigen::setNbThreads(std::atoi(threads));

  Common c;
  std::string out;

  auto* tpl = app.add_subcommand("template", "build the template C (mrci, polygon, matrix, init_nlp, fixed_W)");
  add_common(tpl, c, false);
  tpl->add_option("-o,--out", out, "template JSON path (stdout when omitted)");

  std::string template_out;
  auto* syn = app.add_subcommand("synth", "solve the synthesis SDP");
  add_common(syn, c, false);
  syn->add_option("--template", c.template_path, "template JSON")->check(CLI::ExistingFile);
  syn->add_option("-o,--out", out, "solution JSON path (stdout when omitted)");
  syn->add_option("--template-out", template_out, "also write the template used");

  int steps = -1;
  std::string summary, disturbance = "vertices";
  std::vector<double> x0_opt, p0_opt;
  auto* sim = app.add_subcommand("simulate", "closed-loop simulation with the vertex control law");
  add_common(sim, c, true);
  sim->add_option("--steps", steps, "horizon (config simulate.horizon when omitted)");
  sim->add_option("--x0", x0_opt, "initial state (random point of S(p0) when omitted)");
  sim->add_option("--p0", p0_opt, "initial parameter");
  sim->add_option("--disturbance", disturbance, "vertices or interior")
      ->check(CLI::IsMember({"vertices", "interior"}));
  sim->add_option("-o,--out", out, "trajectory CSV path (stdout when omitted)");
  sim->add_option("--summary", summary, "summary JSON path");

  int samples = 1000;
  auto* ver = app.add_subcommand("verify", "sampled invariance, state, input and configuration checks");
  add_common(ver, c, true);
  ver->add_option("--samples", samples, "random parameter pairs");
  ver->add_option("-o,--out", out, "report JSON path (stdout when omitted)");

  std::string mode = "projection";
  std::vector<int> plane;
  auto* exp = app.add_subcommand("export", "boundary loops of 2D projections or slices of S(p)");
  add_common(exp, c, true);
  exp->add_option("--mode", mode, "projection or slice")->check(CLI::IsMember({"projection", "slice"}));
  exp->add_option("--plane", plane, "two state indices")->expected(2);
  exp->add_option("-o,--out", out, "CSV path (stdout when omitted)");

  std::vector<double> kappas{0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  auto* sweep = app.add_subcommand("sweep-kappa", "d_tot over a list of rate bounds R = kappa B");
  add_common(sweep, c, false);
  sweep->add_option("--template", c.template_path, "template JSON")->check(CLI::ExistingFile);
  sweep->add_option("--kappas", kappas, "rate bounds")->delimiter(',');
  sweep->add_option("-o,--out", out, "CSV path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (tpl->parsed()) {
      const RunConfig cfg = load(c);
      emit(out, dump(template_build_to_json(build_configured_template(cfg))));
      return 0;
    }
    if (syn->parsed()) {
      const RunConfig cfg = load(c);
      const TemplateBuild build = get_template(c, cfg);
      if (!template_out.empty()) write_text(template_out, dump(template_build_to_json(build)));
      const PdRciSolution sol = run_synthesis(cfg, build.tmpl);
      std::fprintf(stderr, "status %s, objective %.10g, %d iterations, %.2f s\n", sol.stats.solver_status.c_str(),
                   sol.stats.objective, sol.stats.iterations, sol.stats.solve_time);
      emit(out, dump(to_json(sol)));
      return 0;
    }
    if (sim->parsed()) {
      const RunConfig cfg = load(c);
      const TemplateBuild build = get_template(c, cfg);
      const ControllerState ctrl{get_solution(c, cfg, build.tmpl), build.tmpl, cfg.problem};
      const Json sim_cfg = cfg.raw.value("simulate", Json::object());
      const int horizon = steps >= 0 ? steps : sim_cfg.value("horizon", 100);
      VectorXd p0 = !p0_opt.empty() ? VectorXd(Eigen::Map<VectorXd>(p0_opt.data(), p0_opt.size()))
                    : sim_cfg.contains("p0") ? vector_from_json(sim_cfg["p0"])
                                             : cfg.problem.vertices_P().vertices.front();
      std::mt19937_64 rng(cfg.seed);
      VectorXd x0;
      if (!x0_opt.empty()) {
        x0 = Eigen::Map<VectorXd>(x0_opt.data(), x0_opt.size());
      } else if (sim_cfg.contains("x0")) {
        x0 = vector_from_json(sim_cfg["x0"]);
      } else {
        const VectorXd y = ctrl.solution.y0 + ctrl.solution.Y * p0;
        const VPolytope v = vertices_at(ctrl.tmpl, y);
        std::exponential_distribution<double> expo(1.0);
        VectorXd weights(v.size());
        for (int i = 0; i < weights.size(); ++i) weights(i) = expo(rng);
        weights /= weights.sum();
        x0 = v.matrix() * weights;
      }
      SimulationOptions sopts;
      sopts.disturbance = disturbance == "interior" ? DisturbanceMode::kInterior : DisturbanceMode::kVertices;
      const Trajectory traj = simulate(ctrl, x0, p0, horizon, rng, sopts);
      emit(out, trajectory_csv(traj));
      Json s;
      s["steps"] = traj.steps();
      double worst = -1e300;
      for (double r : traj.max_residual) worst = std::max(worst, r);
      s["max_residual"] = worst;
      Json viol = Json::array();
      for (const auto& v : traj.violations) {
        Json e;
        e["t"] = v.t;
        e["kind"] = v.kind;
        e["row"] = v.row;
        e["residual"] = v.residual;
        viol.push_back(std::move(e));
      }
      s["violations"] = std::move(viol);
      if (!summary.empty()) write_text(summary, dump(s));
      return traj.violations.empty() ? 0 : kVerifyFail;
    }
    if (ver->parsed()) {
      const RunConfig cfg = load(c);
      const TemplateBuild build = get_template(c, cfg);
      const PdRciSolution sol = get_solution(c, cfg, build.tmpl);
      const VerificationReport rep = verify_solution(sol, build.tmpl, cfg.problem, samples, cfg.seed);
      emit(out, dump(to_json(rep)));
      return rep.pass() ? 0 : kVerifyFail;
    }
    if (exp->parsed()) {
      const RunConfig cfg = load(c);
      const TemplateBuild build = get_template(c, cfg);
      const PdRciSolution sol = get_solution(c, cfg, build.tmpl);
      SliceSpec spec;
      const Json exp_cfg = cfg.raw.value("export", Json::object());
      if (plane.size() == 2) {
        spec.plane = {plane[0], plane[1]};
      } else if (exp_cfg.contains("plane")) {
        spec.plane = {exp_cfg["plane"][0].get<int>(), exp_cfg["plane"][1].get<int>()};
      }
      spec.mode = mode == "slice" ? SliceMode::kSlice : SliceMode::kProjection;
      if (spec.mode == SliceMode::kSlice) {
        spec.fixed = exp_cfg.contains("fixed") ? vector_from_json(exp_cfg["fixed"])
                                               : VectorXd::Zero(build.tmpl.n() - 2);
      }
      emit(out, slices_csv(sol, build.tmpl, config_params(cfg, "export"), spec));
      return 0;
    }
    if (sweep->parsed()) {
      std::ostringstream csv;
      csv << "kappa,dtot,objective,status\n";
      std::optional<TemplateBuild> build;
      for (double kappa : kappas) {
        Common ck = c;
        ck.kappa = kappa;
        const RunConfig cfg = load(ck);
        if (!build) build = get_template(c, cfg);
        const PdRciSolution sol = run_synthesis(cfg, build->tmpl);
        const double total =
            dtot(sol, build->tmpl, cfg.problem, dtot_params(cfg), distance_template(cfg, build->tmpl));
        char line[160];
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%s\n", kappa, total, sol.stats.objective,
                      sol.stats.solver_status.c_str());
        csv << line;
      }
      emit(out, csv.str());
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return 0;
}
