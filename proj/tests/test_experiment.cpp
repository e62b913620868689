#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "epiopt/experiment.hpp"

using namespace epiopt;
using Catch::Matchers::WithinAbs;

TEST_CASE("day table reads the nearest node of each decade stamp") {
  trajectory traj;
  const int M = 240;  // h = 0.5 over [0, 120]
  traj.t.resize(M + 1);
  traj.x.resize(M + 1);
  traj.u.assign(M + 1, 0.0);
  for (int k = 0; k <= M; ++k) {
    traj.t[k] = 0.5 * k;
    const double s = 1.0 - 1e-5 * k;
    traj.x[k] = {s, 1e-5 * k, 0.0};
  }
  const day_table tab = make_day_table(traj, 1e7);
  REQUIRE(tab.day.size() == 12);
  REQUIRE(tab.day.front() == 0);
  REQUIRE(tab.day.back() == 110);
  for (std::size_t r = 0; r < tab.day.size(); ++r) {
    REQUIRE(tab.day[r] == static_cast<int>(10 * r));
    const int k = tab.day[r] * 2;  // node index at h = 0.5
    REQUIRE(tab.infected[r] == std::llround(traj.x[k].i * 1e7));
    REQUIRE(tab.cumulative[r] == std::llround((1.0 - traj.x[k].s) * 1e7));
  }
}

TEST_CASE("person counts are clamped to [0, N]") {
  REQUIRE(detail::person_count(-0.1, 1e7) == 0);
  REQUIRE(detail::person_count(1.5, 1e7) == 10000000);
  REQUIRE(detail::person_count(0.5, 1e7) == 5000000);
  REQUIRE(detail::person_count(0.25000000004, 1e7) == 2500000);
}

TEST_CASE("baseline run reproduces the frozen no-control table") {
  const experiment_config cfg;
  const baseline_result base = run_baseline(cfg);

  REQUIRE(base.traj.nodes() == 1201);
  REQUIRE_THAT(base.objective, WithinAbs(0.9395943034539443, 1e-12));

  const std::vector<long long> infected = {200,     1477,    10894,   79255,
                                           525072,  2134853, 2951624, 1922090,
                                           968105,  448704,  201676,  89526};
  const std::vector<long long> cumulative = {200,     2116,    16248,   119141,
                                             804618,  3646958, 7226626, 8685314,
                                             9137888, 9296577, 9358926, 9384958};
  REQUIRE(base.table.day.size() == 12);
  for (std::size_t r = 0; r < 12; ++r) {
    REQUIRE(std::llabs(base.table.infected[r] - infected[r]) <= 1);
    REQUIRE(std::llabs(base.table.cumulative[r] - cumulative[r]) <= 1);
  }

  // The late-epidemic cumulative counts approach the R0 = 3 final-size attack rate.
  REQUIRE(std::fabs(base.table.cumulative.back() - 9388987.0) / 9388987.0 < 0.001);
}

TEST_CASE("baseline is insensitive to further grid refinement") {
  experiment_config fine;
  fine.steps = 2400;
  const baseline_result a = run_baseline(experiment_config{});
  const baseline_result b = run_baseline(fine);
  for (std::size_t r = 0; r < 12; ++r) {
    REQUIRE(std::llabs(a.table.infected[r] - b.table.infected[r]) <= 1);
    REQUIRE(std::llabs(a.table.cumulative[r] - b.table.cumulative[r]) <= 1);
  }
}

TEST_CASE("config validation guards the experiment grid") {
  experiment_config cfg;
  cfg.lambdas = {0.05, -0.1};
  REQUIRE_THROWS_AS(cfg.validate(), config_error);
  cfg = experiment_config{};
  cfg.lambdas.clear();
  REQUIRE_THROWS_AS(cfg.validate(), config_error);
  cfg = experiment_config{};
  cfg.initial_infected = 2e7;
  REQUIRE_THROWS_AS(cfg.validate(), config_error);
  cfg = experiment_config{};
  cfg.beta = -0.3;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("a short training cell produces a coherent record") {
  experiment_config cfg;
  cfg.steps = 240;
  cfg.iters = 3;
  const cell_result cell = run_cell(cfg, cost_kind::c3, 0.05);
  REQUIRE_FALSE(cell.failed);
  REQUIRE(cell.kind == cost_kind::c3);
  REQUIRE(cell.lambda == 0.05);
  REQUIRE(cell.report.accepted_steps == 3);
  REQUIRE(cell.traj.nodes() == 241);
  REQUIRE(cell.du.size() == 241);
  REQUIRE(cell.costate.p1.size() == 241);
  REQUIRE(cell.costate.p1.back() == -1.0);
  REQUIRE(cell.table.day.size() == 12);
  REQUIRE(cell.theorem.hypotheses_met);
  REQUIRE(cell.theorem.simplex.max_sum_dev <= 1e-9);
  REQUIRE(cell.cost_integral >= 0.0);
}

TEST_CASE("sweep runs every grid cell and reports success") {
  experiment_config cfg;
  cfg.steps = 240;
  cfg.iters = 2;
  cfg.lambdas = {0.05};
  cfg.costs = {cost_kind::c3, cost_kind::c4};
  const sweep_result ok = run_sweep(cfg);
  REQUIRE(ok.cells.size() == 2);
  REQUIRE(ok.all_succeeded());
  REQUIRE(ok.baseline.table.day.size() == 12);
  REQUIRE(ok.cells[0].kind == cost_kind::c3);
  REQUIRE(ok.cells[1].kind == cost_kind::c4);
}
