#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "persuade_sis/config.hpp"
#include "persuade_sis/equilibrium.hpp"
#include "persuade_sis/optimal_control.hpp"
#include "persuade_sis/simulate.hpp"
#include "persuade_sis/sweep.hpp"

namespace persuade_sis::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3 };

namespace detail {

using json = nlohmann::json;

struct Summary {
  json outputs = json::array();
  json metrics = json::object();
  json warnings = json::array();
};

class Artifacts {
public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {}

  template <class Writer>
  void write(Summary& s, const std::string& name, Writer&& writer) {
    std::filesystem::create_directories(dir_);
    const auto path = dir_ / name;
    std::ofstream out(path);
    if (!out) throw NumericalError("cannot open output file " + path.string());
    writer(out);
    if (!out) throw NumericalError("failed writing " + path.string());
    s.outputs.push_back(path.string());
  }

private:
  std::filesystem::path dir_;
};

inline json sne_json(const SneResult& r) {
  return {{"case_id", case_number(r.case_id)}, {"mu_s", r.mu_s},
          {"y_star", r.y_star},                {"z_sbar_star", r.z_sbar_star},
          {"z_ibar_star", r.z_ibar_star}};
}

inline OcpSpec ocp_spec(const ExperimentConfig& c) {
  OcpSpec spec;
  spec.params = c.model;
  spec.smith = c.smith;
  spec.horizon = c.optimize.horizon;
  spec.n_intervals = c.optimize.n_intervals;
  spec.cost = c.optimize.cost_weight > 0.0 ? StageCost::modified(c.optimize.cost_weight)
                                           : StageCost::plain();
  spec.init_state = c.initial;
  spec.integration.step = c.optimize.step;
  spec.integration.output_every = c.optimize.output_every;
  spec.solver.max_iter = c.optimize.max_iter;
  spec.solver.fd_delta = c.optimize.fd_delta;
  spec.solver.credibility_margin = c.optimize.credibility_margin;
  return spec;
}

inline void run_check(const ExperimentConfig& c, Summary& s) {
  const AssumptionReport r = validate_assumptions(c.model);
  s.metrics["a1_truthful"] = r.a1_truthful;
  s.metrics["a1_costs"] = r.a1_costs;
  s.metrics["a1_recovery"] = r.a1_recovery;
  s.metrics["a2_protection_cost"] = r.a2_protection_cost;
  if (!r.assumption1()) {
    s.warnings.push_back("assumption 1 fails; thresholds not computed");
    return;
  }
  const Thresholds t = thresholds(c.model);
  s.metrics["mu_s_min"] = t.mu_s_min;
  s.metrics["mu_s_max"] = t.mu_s_max;
  s.metrics["y_star_p"] = t.y_star_p;
  s.metrics["y_star_int"] = t.y_star_int;
}

inline void run_sne(const ExperimentConfig& c, Artifacts& out, Summary& s) {
  const SneResult r = classify_sne(c.mu_s, c.model);
  s.metrics = sne_json(r);
  const auto res = complementarity_residual(r, c.model);
  s.metrics["complementarity_ok"] = res.ok();
  if (!res.ok()) s.warnings.push_back("equilibrium failed the complementarity check");
  out.write(s, "sne.json", [&](std::ostream& o) { o << s.metrics.dump(2) << '\n'; });
}

inline void run_static_sweep(const ExperimentConfig& c, Artifacts& out, Summary& s) {
  const SweepTable t = static_sweep(c.model, c.sweep.mu_min, c.sweep.mu_max, c.sweep.step);
  out.write(s, "static_sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, t); });
  std::size_t failed = 0;
  for (const auto& cell : t.cells) failed += cell.ok() ? 0 : 1;
  s.metrics["cells"] = t.cells.size();
  s.metrics["failed_cells"] = failed;
  s.metrics["mu_s_max"] = thresholds(c.model).mu_s_max;
  if (t.argmin) {
    s.metrics["argmin_mu_s"] = t.cells[*t.argmin].mu_s;
    s.metrics["min_y_star"] = t.cells[*t.argmin].y_star;
  }
  if (failed > 0) s.warnings.push_back(std::to_string(failed) + " sweep cells failed");
}

inline void run_simulate(const ExperimentConfig& c, Artifacts& out, Summary& s) {
  const ControlSchedule u{c.simulate.horizon, {c.mu_s}};
  IntegrateOptions opts;
  opts.step = c.simulate.step;
  opts.output_every = c.simulate.output_every;
  const Trajectory tr = integrate(c.initial, u, c.model, c.smith, opts);
  out.write(s, "trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, tr); });
  const auto& f = tr.final_state();
  s.metrics = {{"mu_s", c.mu_s},       {"final_y", f.y},
               {"final_z_sbar", f.z_sbar}, {"final_z_ibar", f.z_ibar},
               {"integral_y", integral_of_y(tr)}, {"max_clamp", tr.max_clamp}};
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline void run_optimize(const ExperimentConfig& c, Artifacts& out, Summary& s) {
  const OcpSpec spec = ocp_spec(c);
  const OcpSolution sol = solve(spec);
  const StaticOptimum stat = optimal_static_signal(spec.params);
  const double baseline = objective(spec, spec.constant(stat.mu_s));

  out.write(s, "control.csv", [&](std::ostream& o) { write_control_csv(o, sol.control); });
  out.write(s, "trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, sol.trajectory); });
  s.metrics = {{"objective", sol.objective},
               {"integral_y", state_integral(spec, sol.control)},
               {"iterations", sol.iterations},
               {"first_order_residual", sol.first_order_residual},
               {"converged", sol.converged},
               {"mean_control", mean(sol.control.values)},
               {"static_mu_s", stat.mu_s},
               {"static_baseline_objective", baseline}};
  out.write(s, "solution.json", [&](std::ostream& o) { o << s.metrics.dump(2) << '\n'; });
  if (!sol.converged) s.warnings.push_back("optimizer hit the iteration cap");
}

inline void run_compare(const ExperimentConfig& c, Artifacts& out, Summary& s) {
  const StaticDynamicComparison cmp = compare_static_dynamic(ocp_spec(c));
  out.write(s, "control.csv", [&](std::ostream& o) { write_control_csv(o, cmp.dynamic.control); });
  out.write(s, "static_trajectory.csv",
            [&](std::ostream& o) { write_trajectory_csv(o, cmp.static_trajectory); });
  out.write(s, "dynamic_trajectory.csv",
            [&](std::ostream& o) { write_trajectory_csv(o, cmp.dynamic.trajectory); });
  s.metrics = {{"static_mu_s", cmp.static_signal.mu_s},
               {"static_objective", cmp.static_objective},
               {"dynamic_objective", cmp.dynamic_objective},
               {"dominance_fraction", cmp.dominance_fraction},
               {"iterations", cmp.dynamic.iterations},
               {"first_order_residual", cmp.dynamic.first_order_residual},
               {"converged", cmp.dynamic.converged}};
  out.write(s, "compare.json", [&](std::ostream& o) { o << s.metrics.dump(2) << '\n'; });
  if (cmp.static_signal.grid_derived)
    s.warnings.push_back("static signal taken from grid search (assumption 2 fails)");
  if (!cmp.dynamic.converged) s.warnings.push_back("optimizer hit the iteration cap");
}

inline void run_grid_mui(const ExperimentConfig& c, Artifacts& out, Summary& s) {
  StationarityOptions opts;
  opts.init = c.initial;
  opts.smith = c.smith;
  opts.t_max = c.grid.t_max;
  opts.step = c.grid.dt;
  opts.tol = c.grid.tol;
  const MuiGrid g = grid_mui(c.model, c.grid.step, c.grid.lo, c.grid.hi, opts, 0);
  out.write(s, "mui_matrix.csv", [&](std::ostream& o) { write_mui_matrix_csv(o, g); });
  out.write(s, "mui_summary.csv", [&](std::ostream& o) { write_mui_summary_csv(o, g); });
  std::size_t unconverged = 0;
  for (const auto& row : g.converged)
    for (char ok : row) unconverged += ok ? 0 : 1;
  s.metrics["axis_points"] = g.axis.size();
  s.metrics["unconverged_cells"] = unconverged;
  if (!g.rows.empty()) {
    s.metrics["mu_i_last"] = g.rows.back().mu_i;
    s.metrics["mu_s_opt_last"] = g.rows.back().mu_s_opt;
    s.metrics["min_y_last"] = g.rows.back().min_y;
  }
  if (unconverged > 0)
    s.warnings.push_back(std::to_string(unconverged) + " grid cells did not reach stationarity");
}

inline void emit_error(std::ostream& out, const std::string& kind, const std::string& message) {
  out << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace detail

/**
 * Entry point shared by the executable and the tests.
 *
 *   persuade-sis <subcommand> [--config <path>] [--preset <name>] [--out <dir>]
 *                [--set section.key=value]... [--mu-s <x>] [--dump-config]
 *
 * Prints a one-line JSON summary to `out`. Returns 0 on success, 2 when the
 * configuration is malformed or outside the model's domain, 3 on numerical
 * failures.
 */
inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Persuasion signals for an SIS epidemic with strategic protection"};
  app.name("persuade-sis");
  std::string subcommand, config_path, preset_name, out_dir;
  std::vector<std::string> overrides;
  double mu_s = 0.0;
  bool dump = false;
  app.add_option("subcommand", subcommand, "experiment to run")
      ->required()
      ->check(CLI::IsMember(experiment_kinds()));
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--preset", preset_name, "named preset: fig1-left, fig1-right, fig2, fig3, fig4");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--set", overrides, "override, e.g. --set model.c_p=20");
  app.add_option("--mu-s", mu_s, "signal fidelity for sne / simulate");
  app.add_flag("--dump-config", dump, "print the resolved configuration and exit");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    detail::emit_error(out, "usage", e.what());
    err << app.help();
    return kConfigError;
  }

  ExperimentConfig cfg;
  try {
    if (!preset_name.empty()) cfg = preset(preset_name);
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot read config file " + config_path);
      std::ostringstream text;
      text << in.rdbuf();
      cfg = parse_config(text.str(), cfg);
    }
    cfg.kind = subcommand;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    for (const auto& o : overrides) apply_override(cfg, o);
    if (app.count("--mu-s") > 0) cfg.mu_s = mu_s;
    cfg.validate();
  } catch (const std::exception& e) {
    detail::emit_error(out, "config", e.what());
    err << "persuade-sis: " << e.what() << '\n';
    return kConfigError;
  }

  if (dump) {
    out << dump_config(cfg);
    return kOk;
  }

  detail::Summary summary;
  detail::Artifacts artifacts{cfg.out_dir};
  try {
    if (cfg.kind == "check") detail::run_check(cfg, summary);
    else if (cfg.kind == "sne") detail::run_sne(cfg, artifacts, summary);
    else if (cfg.kind == "static-sweep") detail::run_static_sweep(cfg, artifacts, summary);
    else if (cfg.kind == "simulate") detail::run_simulate(cfg, artifacts, summary);
    else if (cfg.kind == "optimize") detail::run_optimize(cfg, artifacts, summary);
    else if (cfg.kind == "compare") detail::run_compare(cfg, artifacts, summary);
    else if (cfg.kind == "grid-mui") detail::run_grid_mui(cfg, artifacts, summary);
  } catch (const DomainError& e) {
    // Inputs that parse but lie outside the model's domain.
    detail::emit_error(out, "domain", e.what());
    err << "persuade-sis: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    detail::emit_error(out, "numerical", e.what());
    err << "persuade-sis: " << e.what() << '\n';
    return kNumericalError;
  }

  const detail::json line{{"experiment", cfg.kind},
                          {"params_hash", params_hash(cfg)},
                          {"outputs", summary.outputs},
                          {"metrics", summary.metrics},
                          {"warnings", summary.warnings}};
  out << line.dump() << '\n';
  return kOk;
}

}  // namespace persuade_sis::cli
