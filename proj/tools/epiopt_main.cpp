// epiopt command line runner.
//
//   epiopt baseline   no-control tables and figure data
//   epiopt sweep      train every (lambda, cost) cell, verify, export
//   epiopt cost-curve cost-comparison curve data only
//
// Configuration comes from an optional flat key=value file (--config) with
// command line flags taking precedence. All timing and progress goes to
// stderr; files under --out are bit-stable for a fixed config and seed.

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epiopt/epiopt.hpp"

namespace {

struct cli_overrides {
  std::string config_path;
  std::vector<double> lambdas;
  std::vector<std::string> costs;
  double horizon = 0.0;
  int steps = 0;
  double beta = 0.0, gamma = 0.0, population = 0.0, i0 = 0.0;
  std::uint64_t seed = 0;
  int iters = 0;
  double lr = 0.0;
  std::string mode;
  std::string out;
};

void add_common_flags(CLI::App* cmd, cli_overrides& ov) {
  cmd->add_option("--config", ov.config_path, "flat key=value config file");
  cmd->add_option("--lambda", ov.lambdas, "regularization weight(s)");
  cmd->add_option("--cost", ov.costs, "cost kind(s): c1 c2 c3 c4");
  cmd->add_option("--T", ov.horizon, "time horizon in days");
  cmd->add_option("--steps", ov.steps, "RK4 grid steps");
  cmd->add_option("--beta", ov.beta, "transmission rate");
  cmd->add_option("--gamma", ov.gamma, "recovery rate");
  cmd->add_option("--population", ov.population, "population size N");
  cmd->add_option("--i0", ov.i0, "initial infected count");
  cmd->add_option("--seed", ov.seed, "network initialization seed");
  cmd->add_option("--iters", ov.iters, "Adam iterations");
  cmd->add_option("--lr", ov.lr, "Adam learning rate");
  cmd->add_option("--mode", ov.mode, "objective: new_infections | infected_load");
  cmd->add_option("--out", ov.out, "output directory");
}

epiopt::experiment_config make_config(const CLI::App* cmd, const cli_overrides& ov) {
  epiopt::experiment_config cfg;
  if (cmd->count("--config")) cfg = epiopt::parse_config_file(ov.config_path);
  if (cmd->count("--lambda")) cfg.lambdas = ov.lambdas;
  if (cmd->count("--cost")) {
    cfg.costs.clear();
    for (const std::string& c : ov.costs)
      cfg.costs.push_back(epiopt::cost_kind_from_string(c));
  }
  if (cmd->count("--T")) cfg.horizon = ov.horizon;
  if (cmd->count("--steps")) cfg.steps = ov.steps;
  if (cmd->count("--beta")) cfg.beta = ov.beta;
  if (cmd->count("--gamma")) cfg.gamma = ov.gamma;
  if (cmd->count("--population")) cfg.population = ov.population;
  if (cmd->count("--i0")) cfg.initial_infected = ov.i0;
  if (cmd->count("--seed")) cfg.seed = ov.seed;
  if (cmd->count("--iters")) cfg.iters = ov.iters;
  if (cmd->count("--lr")) cfg.learning_rate = ov.lr;
  if (cmd->count("--mode")) cfg.mode = epiopt::objective_mode_from_string(ov.mode);
  if (cmd->count("--out")) cfg.out_dir = ov.out;
  cfg.validate();
  return cfg;
}

std::string config_echo(const epiopt::experiment_config& cfg) {
  return epiopt::json_config(cfg).dump();
}

int run_baseline_cmd(const epiopt::experiment_config& cfg) {
  const std::filesystem::path root = cfg.out_dir;
  const epiopt::baseline_result base = epiopt::run_baseline(cfg);
  epiopt::write_baseline_outputs(base, root / "baseline");
  epiopt::sweep_result wrap;
  wrap.baseline = base;
  epiopt::export_figure_data(wrap, root / "figures");
  std::cerr << "baseline: objective " << epiopt::fmt_double(base.objective)
            << ", cumulative(110) " << base.table.cumulative.back() << "\n";
  std::printf("day,infected,cumulative\n");
  for (std::size_t k = 0; k < base.table.day.size(); ++k)
    std::printf("%d,%lld,%lld\n", base.table.day[k], base.table.infected[k],
                base.table.cumulative[k]);
  return 0;
}

int run_sweep_cmd(const epiopt::experiment_config& cfg) {
  const std::filesystem::path root = cfg.out_dir;
  const auto t0 = std::chrono::steady_clock::now();
  const epiopt::cell_checkpoint_factory checkpoints =
      [&](epiopt::cost_kind kind, double lambda) -> epiopt::checkpoint_sink {
    const std::filesystem::path dir =
        root / "cells" / epiopt::cell_slug(kind, lambda) / "checkpoints";
    return [dir](int iter, const epiopt::control_net& net) {
      epiopt::save_theta(dir / ("theta_" + std::to_string(iter)), net, 0);
    };
  };

  std::cerr << "sweep over " << cfg.lambdas.size() << " lambda x "
            << cfg.costs.size() << " cost cells\n";
  const epiopt::sweep_result sweep = epiopt::run_sweep(cfg, checkpoints);
  epiopt::write_sweep_outputs(sweep, cfg, root);

  for (const epiopt::cell_result& cell : sweep.cells) {
    std::cerr << epiopt::cell_slug(cell.kind, cell.lambda) << ": ";
    if (cell.failed) {
      std::cerr << "FAILED (" << cell.error << ")\n";
    } else {
      std::cerr << "J " << epiopt::fmt_double(cell.report.best_objective)
                << ", cumulative(110) " << cell.table.cumulative.back() << ", tau "
                << epiopt::fmt_double(cell.theorem.tau) << "\n";
    }
  }
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  std::cerr << "sweep wall time " << dt.count() << " s\n";
  if (!sweep.all_succeeded()) {
    std::cerr << "one or more cells failed\n";
    return 1;
  }
  return 0;
}

int run_cost_curve_cmd(const epiopt::experiment_config& cfg) {
  const std::filesystem::path out =
      std::filesystem::path(cfg.out_dir) / "figures" / "fig1_cost_functions.csv";
  epiopt::atomic_write(out, epiopt::csv_cost_curve());
  std::cerr << "wrote " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal epidemic intervention scheduling"};
  app.require_subcommand(1);

  cli_overrides ov_base, ov_sweep, ov_curve;
  CLI::App* cmd_base = app.add_subcommand("baseline", "no-control reference run");
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "train the lambda x cost grid");
  CLI::App* cmd_curve = app.add_subcommand("cost-curve", "cost comparison data");
  add_common_flags(cmd_base, ov_base);
  add_common_flags(cmd_sweep, ov_sweep);
  add_common_flags(cmd_curve, ov_curve);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_base->parsed()) return run_baseline_cmd(make_config(cmd_base, ov_base));
    if (cmd_sweep->parsed()) return run_sweep_cmd(make_config(cmd_sweep, ov_sweep));
    return run_cost_curve_cmd(make_config(cmd_curve, ov_curve));
  } catch (const epiopt::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    try {
      const cli_overrides& ov = cmd_base->parsed()   ? ov_base
                                : cmd_sweep->parsed() ? ov_sweep
                                                      : ov_curve;
      const CLI::App* cmd = cmd_base->parsed()   ? cmd_base
                            : cmd_sweep->parsed() ? cmd_sweep
                                                  : cmd_curve;
      std::cerr << "config: " << config_echo(make_config(cmd, ov)) << "\n";
    } catch (...) {
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
