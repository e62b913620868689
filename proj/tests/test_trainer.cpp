#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "epiopt/trainer.hpp"

using namespace epiopt;
using Catch::Matchers::WithinAbs;

namespace {

const epidemic_params kParams;

sir_state default_init() {
  const double i0 = 200.0 / kParams.population;
  return {1.0 - i0, i0, 0.0};
}

train_config quick_config(int iters, int steps) {
  train_config cfg;
  cfg.iterations = iters;
  cfg.steps = steps;
  return cfg;
}

}  // namespace

TEST_CASE("adam_step reproduces the hand-computed first update") {
  // First step, single active gradient component g:
  //   m = (1-b1) g, v = (1-b2) g^2, mhat = g, vhat = g^2,
  //   delta = lr * g / (|g| + eps).
  train_config cfg;
  std::array<double, kNetParams> theta{}, grad{}, m{}, v{};
  theta[7] = 0.25;
  grad[7] = 0.5;
  adam_step(theta, grad, m, v, 1, cfg);
  REQUIRE(m[7] == (1.0 - 0.9) * 0.5);
  REQUIRE(v[7] == (1.0 - 0.999) * (0.5 * 0.5));
  const double expect = 0.25 - 1e-3 * 0.5 / (0.5 + 1e-8);
  REQUIRE_THAT(theta[7], WithinAbs(expect, 1e-15));
  for (int j = 0; j < kNetParams; ++j)
    if (j != 7) REQUIRE(theta[j] == 0.0);

  // Second step with the same gradient keeps the direction, magnitude near lr.
  adam_step(theta, grad, m, v, 2, cfg);
  REQUIRE(theta[7] < expect);
  REQUIRE(theta[7] > expect - 2e-3);
}

TEST_CASE("adam_step rejects non-finite gradients") {
  train_config cfg;
  std::array<double, kNetParams> theta{}, grad{}, m{}, v{};
  grad[0] = std::nan("");
  REQUIRE_THROWS_AS(adam_step(theta, grad, m, v, 1, cfg), numerical_error);
}

TEST_CASE("training is deterministic and strictly bookkeeps its history") {
  const cost_spec cost = cost_spec::make(cost_kind::c3, 0.05);
  const control_net init = control_net::init_xavier(42, 1.0);
  const train_config cfg = quick_config(8, 240);

  const train_report a =
      train(init, cost, kParams, default_init(), objective_mode::new_infections, cfg);
  const train_report b =
      train(init, cost, kParams, default_init(), objective_mode::new_infections, cfg);

  REQUIRE(a.accepted_steps == 8);
  REQUIRE(a.objective_history.size() == 8);
  REQUIRE(a.objective_history == b.objective_history);
  REQUIRE(a.final_net.theta == b.final_net.theta);
  REQUIRE(a.initial_objective == b.initial_objective);
  REQUIRE(a.final_objective == a.objective_history.back());

  // best is the minimum over the history (or the start).
  double best = a.initial_objective;
  for (double j : a.objective_history) best = std::min(best, j);
  REQUIRE(a.best_objective == best);
}

TEST_CASE("a short descent run reduces the objective") {
  const cost_spec cost = cost_spec::make(cost_kind::c3, 0.01);
  const control_net init = control_net::init_xavier(42, 1.0);
  const train_config cfg = quick_config(25, 240);
  const train_report rep =
      train(init, cost, kParams, default_init(), objective_mode::new_infections, cfg);
  REQUIRE(rep.final_objective < rep.initial_objective);
  REQUIRE(rep.best_objective <= rep.final_objective);
  REQUIRE(rep.backtracks == 0);
}

TEST_CASE("domain violations trigger backtracking instead of failure") {
  // Start just inside the barrier with a negligible cost weight: the epidemic
  // term pushes u upward, the full step crosses u = 1 and must be shortened.
  const cost_spec cost = cost_spec::make(cost_kind::c3, 1e-12);
  control_net init = control_net::zeros(120.0);
  init.theta[net_layout::b5] = 0.9999;
  train_config cfg = quick_config(3, 120);
  cfg.learning_rate = 0.05;
  const train_report rep =
      train(init, cost, kParams, default_init(), objective_mode::new_infections, cfg);
  REQUIRE(rep.backtracks > 0);
  REQUIRE(rep.accepted_steps == 3);
  for (std::size_t k = 0; k <= 120; ++k)
    REQUIRE(rep.final_net.forward(k * 1.0) < 1.0);
}

TEST_CASE("checkpoint sink fires on the configured cadence") {
  const cost_spec cost = cost_spec::make(cost_kind::c3, 0.05);
  const control_net init = control_net::init_xavier(7, 1.0);
  train_config cfg = quick_config(9, 240);
  cfg.checkpoint_every = 3;
  std::vector<int> seen;
  const train_report rep =
      train(init, cost, kParams, default_init(), objective_mode::new_infections, cfg,
            [&](int k, const control_net& net) {
              seen.push_back(k);
              REQUIRE(net.time_scale == init.time_scale);
            });
  REQUIRE(seen == std::vector<int>{3, 6, 9});
  REQUIRE(rep.accepted_steps == 9);
}

TEST_CASE("config validation rejects bad settings") {
  train_config cfg;
  cfg.learning_rate = 0.0;
  REQUIRE_THROWS_AS(cfg.validate(), config_error);
  cfg = train_config{};
  cfg.iterations = 0;
  REQUIRE_THROWS_AS(cfg.validate(), config_error);
  cfg = train_config{};
  cfg.steps = 0;
  REQUIRE_THROWS_AS(cfg.validate(), config_error);
}
