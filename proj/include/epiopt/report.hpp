#pragma once

// Run-report assembly: per-cell output directories, sweep summaries and
// plot-ready figure data. File layout under an output root:
//
//   baseline/trajectory.csv, baseline/control.csv, baseline/table.csv
//   cells/<cost>_lambda_<l>/{trajectory,control,costate,table}.csv
//   cells/<cost>_lambda_<l>/report.json, theta.bin, theta.meta
//   figures/... (see export_figure_data)
//   summary.json
//
// Nothing written here contains wall-clock timing; identical configs and
// seeds must reproduce identical bytes (timing goes to stderr in the CLI).

#include <filesystem>
#include <string>
#include <vector>

#include "epiopt/experiment.hpp"
#include "epiopt/io.hpp"

namespace epiopt {

// Stable directory slug for a sweep cell; lambda printed in shortest form
// with '.' replaced so the name stays portable.
inline std::string cell_slug(cost_kind kind, double lambda) {
  std::string l = fmt_double(lambda);
  for (char& c : l)
    if (c == '.' || c == '-' || c == '+') c = (c == '.') ? 'p' : 'm';
  return std::string(to_string(kind)) + "_lambda_" + l;
}

inline nlohmann::json json_config(const experiment_config& cfg) {
  nlohmann::json j;
  j["population"] = cfg.population;
  j["initial_infected"] = cfg.initial_infected;
  j["initial_removed"] = cfg.initial_removed;
  j["beta"] = cfg.beta;
  j["gamma"] = cfg.gamma;
  j["horizon"] = cfg.horizon;
  j["steps"] = cfg.steps;
  j["seed"] = cfg.seed;
  j["iters"] = cfg.iters;
  j["learning_rate"] = cfg.learning_rate;
  j["mode"] = to_string(cfg.mode);
  j["time_scale"] = cfg.time_scale;
  std::vector<double> ls(cfg.lambdas.begin(), cfg.lambdas.end());
  j["lambdas"] = ls;
  std::vector<std::string> cs;
  for (cost_kind k : cfg.costs) cs.emplace_back(to_string(k));
  j["costs"] = cs;
  return j;
}

inline void write_baseline_outputs(const baseline_result& base,
                                   const std::filesystem::path& dir) {
  atomic_write(dir / "trajectory.csv", csv_trajectory(base.traj));
  atomic_write(dir / "control.csv",
               csv_control(base.traj, std::vector<double>(base.traj.nodes(), 0.0)));
  atomic_write(dir / "table.csv", csv_day_table(base.table));
}

inline void write_cell_outputs(const cell_result& cell, const experiment_config& cfg,
                               const std::filesystem::path& dir) {
  atomic_write(dir / "report.json", json_cell(cell).dump(2) + "\n");
  if (cell.failed) return;
  atomic_write(dir / "trajectory.csv", csv_trajectory(cell.traj));
  atomic_write(dir / "control.csv", csv_control(cell.traj, cell.du));
  atomic_write(dir / "costate.csv", csv_costate(cell.costate));
  atomic_write(dir / "table.csv", csv_day_table(cell.table));
  save_theta(dir / "theta", cell.report.best_net, cfg.seed);
}

inline nlohmann::json json_sweep_summary(const sweep_result& sweep,
                                         const experiment_config& cfg) {
  nlohmann::json j;
  j["config"] = json_config(cfg);
  j["baseline_objective"] = sweep.baseline.objective;
  j["baseline_table"] = json_day_table(sweep.baseline.table);
  nlohmann::json cells = nlohmann::json::array();
  for (const cell_result& cell : sweep.cells) {
    nlohmann::json c;
    c["cost"] = to_string(cell.kind);
    c["lambda"] = cell.lambda;
    c["dir"] = "cells/" + cell_slug(cell.kind, cell.lambda);
    c["failed"] = cell.failed;
    if (cell.failed) c["error"] = cell.error;
    else {
      c["objective_best"] = cell.report.best_objective;
      c["cumulative_110"] = cell.table.cumulative.back();
      c["infected_110"] = cell.table.infected.back();
      c["tau"] = cell.theorem.tau;
    }
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  j["all_succeeded"] = sweep.all_succeeded();
  return j;
}

// Plot-ready export. A baseline-only result writes exactly two files (the
// trajectory panel and the u = 0 control panel). When trained cells are
// present it adds the cost-comparison curve, one trajectory and one control
// CSV per cell grouped by lambda, and a manifest mapping files to panels.
inline std::vector<std::string> export_figure_data(const sweep_result& sweep,
                                                   const std::filesystem::path& dir) {
  std::vector<std::string> written;
  auto emit = [&](const std::filesystem::path& rel, const std::string& content) {
    atomic_write(dir / rel, content);
    written.push_back(rel.generic_string());
  };

  emit("baseline_trajectory.csv", csv_trajectory(sweep.baseline.traj));
  emit("baseline_control.csv",
       csv_control(sweep.baseline.traj,
                   std::vector<double>(sweep.baseline.traj.nodes(), 0.0)));
  if (sweep.cells.empty()) return written;

  emit("fig1_cost_functions.csv", csv_cost_curve());

  nlohmann::json manifest;
  manifest["fig1_cost_comparison"] = "fig1_cost_functions.csv";
  manifest["baseline"] = {{"trajectory", "baseline_trajectory.csv"},
                          {"control", "baseline_control.csv"}};
  nlohmann::json panels = nlohmann::json::array();
  for (const cell_result& cell : sweep.cells) {
    if (cell.failed) continue;
    const std::string stem =
        "lambda_" + fmt_double(cell.lambda) + "/" + std::string(to_string(cell.kind));
    emit(stem + "_trajectory.csv", csv_trajectory(cell.traj));
    emit(stem + "_control.csv", csv_control(cell.traj, cell.du));
    panels.push_back({{"cost", to_string(cell.kind)},
                      {"lambda", cell.lambda},
                      {"trajectory", stem + "_trajectory.csv"},
                      {"control", stem + "_control.csv"}});
  }
  manifest["panels"] = std::move(panels);
  atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
  written.push_back("manifest.json");
  return written;
}

// Full artifact tree for a sweep run.
inline void write_sweep_outputs(const sweep_result& sweep, const experiment_config& cfg,
                                const std::filesystem::path& root) {
  write_baseline_outputs(sweep.baseline, root / "baseline");
  for (const cell_result& cell : sweep.cells)
    write_cell_outputs(cell, cfg, root / "cells" / cell_slug(cell.kind, cell.lambda));
  export_figure_data(sweep, root / "figures");
  atomic_write(root / "summary.json", json_sweep_summary(sweep, cfg).dump(2) + "\n");
}

}  // namespace epiopt
