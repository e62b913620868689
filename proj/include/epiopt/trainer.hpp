#pragma once

// Deterministic Adam training of the control net against the adjoint
// gradient. One accepted step per iteration; if a proposed step drives the
// control out of the cost domain, the step size is halved for that step only
// (up to 30 times). The reported solution is the best iterate seen, not
// necessarily the last (the problem is non-convex).

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "epiopt/adjoint.hpp"
#include "epiopt/control_net.hpp"
#include "epiopt/cost.hpp"
#include "epiopt/errors.hpp"
#include "epiopt/sir.hpp"

namespace epiopt {

struct train_config {
  double learning_rate = 1e-3;
  int iterations = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int steps = 1200;            // forward/backward grid M
  int max_backtracks = 30;
  // Optional early stop: |dJ| < 1e-10 over 50 consecutive accepted steps.
  bool early_stop = false;
  // Checkpoint callback cadence (accepted iterations); 0 disables.
  int checkpoint_every = 100;

  void validate() const {
    if (!(learning_rate > 0.0)) throw config_error("train_config: learning_rate <= 0");
    if (iterations < 1) throw config_error("train_config: iterations < 1");
    if (steps < 1) throw config_error("train_config: steps < 1");
  }
};

struct train_report {
  std::vector<double> objective_history;  // J after each accepted step
  control_net final_net;
  control_net best_net;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  double best_objective = 0.0;
  long backtracks = 0;
  int accepted_steps = 0;
  double wall_seconds = 0.0;
};

// Standard bias-corrected Adam update, in place. step_index starts at 1.
inline void adam_step(std::array<double, kNetParams>& theta,
                      const std::array<double, kNetParams>& grad,
                      std::array<double, kNetParams>& m,
                      std::array<double, kNetParams>& v, int step_index,
                      const train_config& cfg, double step_scale = 1.0) {
  for (double g : grad)
    if (!std::isfinite(g)) throw numerical_error("adam_step: non-finite gradient");
  const double c1 = 1.0 - std::pow(cfg.beta1, step_index);
  const double c2 = 1.0 - std::pow(cfg.beta2, step_index);
  const double lr = cfg.learning_rate * step_scale;
  for (int j = 0; j < kNetParams; ++j) {
    m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * grad[j];
    v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * grad[j] * grad[j];
    const double mh = m[j] / c1;
    const double vh = v[j] / c2;
    theta[j] -= lr * mh / (std::sqrt(vh) + cfg.epsilon);
  }
}

namespace detail {

// Adam moment update only (used when retrying a step with a smaller rate:
// moments are advanced once, the parameter update is recomputed from them).
struct adam_state {
  std::array<double, kNetParams> m{};
  std::array<double, kNetParams> v{};

  void absorb(const std::array<double, kNetParams>& grad, const train_config& cfg) {
    for (int j = 0; j < kNetParams; ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * grad[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * grad[j] * grad[j];
    }
  }

  std::array<double, kNetParams> apply(const std::array<double, kNetParams>& theta,
                                       int step_index, const train_config& cfg,
                                       double step_scale) const {
    const double c1 = 1.0 - std::pow(cfg.beta1, step_index);
    const double c2 = 1.0 - std::pow(cfg.beta2, step_index);
    const double lr = cfg.learning_rate * step_scale;
    std::array<double, kNetParams> out;
    for (int j = 0; j < kNetParams; ++j)
      out[j] = theta[j] - lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg.epsilon);
    return out;
  }
};

}  // namespace detail

// Checkpoint sink: called with (accepted iteration index, current net).
using checkpoint_sink = std::function<void(int, const control_net&)>;

inline train_report train(const control_net& init, const cost_spec& cost,
                          const epidemic_params& params, const sir_state& start,
                          objective_mode mode, const train_config& cfg,
                          const checkpoint_sink& checkpoint = {}) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  control_net net = init;
  grad_result cur = grad_objective(net, cost, params, start, cfg.steps, mode);

  train_report rep;
  rep.initial_objective = cur.objective;
  rep.objective_history.reserve(cfg.iterations);
  rep.best_objective = cur.objective;
  rep.best_net = net;

  detail::adam_state adam;
  int flat_steps = 0;
  for (int k = 1; k <= cfg.iterations; ++k) {
    for (double g : cur.grad)
      if (!std::isfinite(g)) throw numerical_error("train: non-finite gradient");
    adam.absorb(cur.grad, cfg);

    double scale = 1.0;
    bool accepted = false;
    control_net cand = net;
    grad_result next;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      cand.theta = adam.apply(net.theta, k, cfg, scale);
      try {
        next = grad_objective(cand, cost, params, start, cfg.steps, mode);
        accepted = true;
        break;
      } catch (const cost_domain_error&) {
        scale *= 0.5;
        ++rep.backtracks;
      }
    }
    if (!accepted)
      throw training_failed("train: step rejected after " +
                            std::to_string(cfg.max_backtracks) + " backtracks at iteration " +
                            std::to_string(k));

    const double prev_J = cur.objective;
    net = cand;
    cur = std::move(next);
    rep.objective_history.push_back(cur.objective);
    ++rep.accepted_steps;
    if (cur.objective < rep.best_objective) {
      rep.best_objective = cur.objective;
      rep.best_net = net;
    }
    if (checkpoint && cfg.checkpoint_every > 0 && k % cfg.checkpoint_every == 0)
      checkpoint(k, net);

    if (cfg.early_stop) {
      flat_steps = std::fabs(cur.objective - prev_J) < 1e-10 ? flat_steps + 1 : 0;
      if (flat_steps >= 50) break;
    }
  }

  rep.final_net = net;
  rep.final_objective = cur.objective;
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace epiopt
