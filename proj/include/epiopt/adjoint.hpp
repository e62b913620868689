#pragma once

// Objective evaluation and the adjoint parameter gradient.
//
// The running cost is absorbed into an augmented state so the objective is a
// pure terminal quantity:
//   y = (s, i, r, z, zc),  z' = beta(1-u)si + lambda c(u)   [new_infections]
//                          z' = i + lambda c(u)             [infected_load]
//   zc' = c(u)  (plain cost integral, kept for identity checks and reports)
//   J = z(T).
// Control values, cost values and du/dtheta are precomputed once per
// iteration on the half grid t_j = j h/2 (every RK4 stage of both sweeps
// lands on it). The backward sweep is the exact reverse of the forward RK4
// recursion (the discrete adjoint): stage states are recomputed from the
// stored node states and the tape, cotangents flow back through the stages,
// and the control cotangents collected at the tape nodes are pushed through
// du/dtheta. a(0) therefore equals dJ/dtheta of the computed objective to
// roundoff (central differences of J reproduce it at any grid), and the node
// cotangents P(t_k), with P(T) = (0,0,0,1), are a 4th-order approximation of
// the continuous adjoint of (s, i, r, z).

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "epiopt/control_net.hpp"
#include "epiopt/cost.hpp"
#include "epiopt/errors.hpp"
#include "epiopt/rk4.hpp"
#include "epiopt/sir.hpp"

namespace epiopt {

enum class objective_mode { new_infections, infected_load };

inline const char* to_string(objective_mode m) {
  return m == objective_mode::new_infections ? "new_infections" : "infected_load";
}

inline objective_mode objective_mode_from_string(const std::string& s) {
  if (s == "new_infections") return objective_mode::new_infections;
  if (s == "infected_load") return objective_mode::infected_load;
  throw config_error("unknown objective mode: " + s);
}

// Control, cost and gradient values tabulated on the half grid.
struct control_tape {
  double horizon = 0.0;
  int steps = 0;                 // M
  std::vector<double> t;         // 2M+1 half-grid times
  control_net::batch net;        // u, du, optional grad rows at those times
  std::vector<double> c;         // cost value at u_j
  std::vector<double> c1;        // cost derivative at u_j

  double step() const { return horizon / steps; }
};

inline control_tape make_control_tape(const control_net& net, const cost_spec& cost,
                                      const epidemic_params& params, int steps,
                                      bool need_grad) {
  if (steps < 1) throw config_error("control_tape: steps must be >= 1");
  control_tape tape;
  tape.horizon = params.horizon;
  tape.steps = steps;
  const int n = 2 * steps + 1;
  tape.t.resize(n);
  const double hh = params.horizon / (2.0 * steps);
  for (int j = 0; j < n; ++j) tape.t[j] = (j == n - 1) ? params.horizon : j * hh;
  tape.net = net.eval_grid(tape.t, need_grad);
  tape.c.resize(n);
  tape.c1.resize(n);
  for (int j = 0; j < n; ++j) {
    const double u = tape.net.u[j];
    cost.require_domain(u, tape.t[j]);
    tape.c[j] = cost.value(u);
    tape.c1[j] = cost.d1(u);
  }
  return tape;
}

// Forward solution with node states and node derivatives (for interpolation).
struct forward_solution {
  trajectory traj;                    // t, (s,i,r), u at the M+1 nodes
  std::vector<vec<5>> y;              // full augmented states
  std::vector<vec<5>> f;              // RHS at the nodes
  double objective = 0.0;             // z(T)
  double cost_integral = 0.0;         // zc(T)
};

namespace detail {

inline vec<5> augmented_rhs(const vec<5>& y, double u, double c, double lambda,
                            const epidemic_params& p, objective_mode mode) {
  const double bsi = p.beta * y[0] * y[1];
  const double f1 = u * bsi - bsi;
  const double f3 = p.gamma * y[1];
  const double f2 = -(f1 + f3);
  const double zdot = (mode == objective_mode::new_infections)
                          ? (bsi - u * bsi) + lambda * c
                          : y[1] + lambda * c;
  return {f1, f2, f3, zdot, c};
}

}  // namespace detail

inline forward_solution integrate_forward(const control_tape& tape,
                                          const cost_spec& cost,
                                          const epidemic_params& params,
                                          const sir_state& init,
                                          objective_mode mode) {
  const int M = tape.steps;
  const double h = tape.step();
  forward_solution out;
  out.y.resize(M + 1);
  out.f.resize(M + 1);
  out.y[0] = {init.s, init.i, init.r, 0.0, 0.0};

  auto rhs_at = [&](const vec<5>& y, int j) {
    return detail::augmented_rhs(y, tape.net.u[j], tape.c[j], cost.lambda, params, mode);
  };
  out.f[0] = rhs_at(out.y[0], 0);
  for (int k = 0; k < M; ++k) {
    const vec<5>& y = out.y[k];
    const vec<5> k1 = rhs_at(y, 2 * k);
    vec<5> tmp;
    for (int j = 0; j < 5; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
    const vec<5> k2 = rhs_at(tmp, 2 * k + 1);
    for (int j = 0; j < 5; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
    const vec<5> k3 = rhs_at(tmp, 2 * k + 1);
    for (int j = 0; j < 5; ++j) tmp[j] = y[j] + h * k3[j];
    const vec<5> k4 = rhs_at(tmp, 2 * k + 2);
    vec<5>& yn = out.y[k + 1];
    for (int j = 0; j < 5; ++j)
      yn[j] = y[j] + h / 6.0 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]);
    if (!detail::finite(yn))
      throw integration_diverged("forward integration diverged", tape.t[2 * k + 2]);
    out.f[k + 1] = rhs_at(yn, 2 * k + 2);
  }

  out.traj.t.resize(M + 1);
  out.traj.x.resize(M + 1);
  out.traj.u.resize(M + 1);
  for (int k = 0; k <= M; ++k) {
    out.traj.t[k] = tape.t[2 * k];
    out.traj.x[k] = {out.y[k][0], out.y[k][1], out.y[k][2]};
    out.traj.u[k] = tape.net.u[2 * k];
  }
  out.objective = out.y[M][3];
  out.cost_integral = out.y[M][4];
  return out;
}

// J and the forward trajectory for a given control net.
inline forward_solution evaluate_objective(const control_net& net, const cost_spec& cost,
                                           const epidemic_params& params,
                                           const sir_state& init, int steps,
                                           objective_mode mode) {
  const control_tape tape = make_control_tape(net, cost, params, steps, false);
  return integrate_forward(tape, cost, params, init, mode);
}

struct grad_result {
  std::array<double, kNetParams> grad{};
  double objective = 0.0;
  double cost_integral = 0.0;
  trajectory traj;
};

// Diagnostic record of the backward sweep.
struct adjoint_profile {
  std::vector<double> t;
  std::vector<std::array<double, 4>> p;  // adjoint of (s, i, r, z) at nodes
  std::vector<double> a_norm;            // Euclidean norm of a(t) at nodes
};

namespace detail {

// Pullback of one augmented-RHS evaluation: accumulates the cotangent of the
// (s, i) inputs into ybar and of the control input into ubar, given the
// cotangent v of the stage output. Rows r, z, zc of dF/dy are zero, and the
// zc cotangent is identically zero (J = z(T)), so 4 components suffice.
inline void rhs_pullback(const vec<4>& v, double s, double i, double u, double c1,
                         double lambda, const epidemic_params& pr, objective_mode mode,
                         vec<4>& ybar, double& ubar) {
  const double bi = pr.beta * (1.0 - u) * i;
  const double bs = pr.beta * (1.0 - u) * s;
  const double bsi = pr.beta * s * i;
  const double gs = (mode == objective_mode::new_infections) ? bi : 0.0;
  const double gi = (mode == objective_mode::new_infections) ? bs : 1.0;
  ybar[0] += -v[0] * bi + v[1] * bi + v[3] * gs;
  ybar[1] += -v[0] * bs + v[1] * (bs - pr.gamma) + v[2] * pr.gamma + v[3] * gi;
  const double fu_z = (mode == objective_mode::new_infections) ? -bsi + lambda * c1
                                                               : lambda * c1;
  ubar += v[0] * bsi - v[1] * bsi + v[3] * fu_z;
}

}  // namespace detail

// Backward sweep shared by grad_objective and solve_adjoint_trajectory:
// exact reverse-mode differentiation of the forward RK4 recursion.
// grad_out may be null (profile-only run); profile may be null (gradient run).
inline void backward_pass(const control_tape& tape, const forward_solution& fwd,
                          const cost_spec& cost, const epidemic_params& params,
                          objective_mode mode, std::array<double, kNetParams>* grad_out,
                          adjoint_profile* profile) {
  const int M = tape.steps;
  const double h = tape.step();
  const bool need_grad = grad_out != nullptr;
  if (need_grad && tape.net.grad.empty())
    throw numerical_error("backward_pass: tape built without gradients");

  vec<4> P = {0.0, 0.0, 0.0, 1.0};  // cotangent of (s, i, r, z) at the node
  std::vector<double> a;
  if (need_grad) a.assign(kNetParams, 0.0);

  auto record = [&](int node) {
    if (!profile) return;
    profile->t[node] = tape.t[2 * node];
    profile->p[node] = {P[0], P[1], P[2], P[3]};
    if (need_grad) {
      double nrm = 0.0;
      for (double v : a) nrm += v * v;
      profile->a_norm[node] = std::sqrt(nrm);
    }
  };
  if (profile) {
    profile->t.resize(M + 1);
    profile->p.resize(M + 1);
    profile->a_norm.assign(M + 1, 0.0);
  }
  record(M);

  auto rhs_at = [&](const vec<5>& y, int j) {
    return detail::augmented_rhs(y, tape.net.u[j], tape.c[j], cost.lambda, params, mode);
  };
  auto pull = [&](const vec<4>& v, double s, double i, int j, vec<4>& ybar, double& ubar) {
    detail::rhs_pullback(v, s, i, tape.net.u[j], tape.c1[j], cost.lambda, params, mode,
                         ybar, ubar);
  };
  auto flush = [&](int j, double w) {
    const double* gj = tape.net.grad.data() + static_cast<std::size_t>(j) * kNetParams;
    double* ap = a.data();
    for (int q = 0; q < kNetParams; ++q) ap[q] += w * gj[q];
  };

  double carry = 0.0;  // control cotangent of node 2k, pending this step's share
  for (int k = M - 1; k >= 0; --k) {
    // Recompute the stage states exactly as the forward pass built them.
    const vec<5>& y = fwd.y[k];
    const vec<5>& k1 = fwd.f[k];  // forward k1 == stored node RHS
    vec<5> Y2, Y3, Y4;
    for (int j = 0; j < 5; ++j) Y2[j] = y[j] + 0.5 * h * k1[j];
    const vec<5> k2 = rhs_at(Y2, 2 * k + 1);
    for (int j = 0; j < 5; ++j) Y3[j] = y[j] + 0.5 * h * k2[j];
    const vec<5> k3 = rhs_at(Y3, 2 * k + 1);
    for (int j = 0; j < 5; ++j) Y4[j] = y[j] + h * k3[j];

    // y_{k+1} = y_k + h/6 (k1 + 2 k2 + 2 k3 + k4); pull P back through it.
    vec<4> kb1, kb2, kb3, kb4;
    for (int j = 0; j < 4; ++j) {
      kb1[j] = h / 6.0 * P[j];
      kb2[j] = h / 3.0 * P[j];
      kb3[j] = h / 3.0 * P[j];
      kb4[j] = h / 6.0 * P[j];
    }
    vec<4> ybar = P;  // identity term of the step map
    double u1 = 0.0, u23 = 0.0, u4 = 0.0;

    vec<4> Yb4 = {};  // k4 = F(Y4, u4), Y4 = y_k + h k3
    pull(kb4, Y4[0], Y4[1], 2 * k + 2, Yb4, u4);
    for (int j = 0; j < 4; ++j) { kb3[j] += h * Yb4[j]; ybar[j] += Yb4[j]; }

    vec<4> Yb3 = {};  // k3 = F(Y3, u23), Y3 = y_k + h/2 k2
    pull(kb3, Y3[0], Y3[1], 2 * k + 1, Yb3, u23);
    for (int j = 0; j < 4; ++j) { kb2[j] += 0.5 * h * Yb3[j]; ybar[j] += Yb3[j]; }

    vec<4> Yb2 = {};  // k2 = F(Y2, u23), Y2 = y_k + h/2 k1
    pull(kb2, Y2[0], Y2[1], 2 * k + 1, Yb2, u23);
    for (int j = 0; j < 4; ++j) { kb1[j] += 0.5 * h * Yb2[j]; ybar[j] += Yb2[j]; }

    pull(kb1, y[0], y[1], 2 * k, ybar, u1);  // k1 = F(y_k, u1)

    P = ybar;
    if (!std::isfinite(P[0]) || !std::isfinite(P[1]))
      throw numerical_error("backward_pass: adjoint diverged at t=" +
                            std::to_string(tape.t[2 * k]));

    if (need_grad) {
      // Node 2k+2 is complete: this step's k4 share plus the previous
      // (later-time) step's k1 share. The midpoint node belongs to this
      // step alone; node 2k waits for the next step down.
      flush(2 * k + 2, u4 + carry);
      flush(2 * k + 1, u23);
      carry = u1;
      if (k == 0) flush(0, carry);
    }
    record(k);
  }

  if (need_grad) {
    for (int j = 0; j < kNetParams; ++j) {
      if (!std::isfinite(a[j])) throw numerical_error("backward_pass: non-finite gradient");
      (*grad_out)[j] = a[j];
    }
  }
}

// Full gradient dJ/dtheta via one forward and one backward sweep.
inline grad_result grad_objective(const control_net& net, const cost_spec& cost,
                                  const epidemic_params& params, const sir_state& init,
                                  int steps, objective_mode mode) {
  const control_tape tape = make_control_tape(net, cost, params, steps, true);
  forward_solution fwd = integrate_forward(tape, cost, params, init, mode);
  grad_result out;
  backward_pass(tape, fwd, cost, params, mode, &out.grad, nullptr);
  out.objective = fwd.objective;
  out.cost_integral = fwd.cost_integral;
  out.traj = std::move(fwd.traj);
  return out;
}

// Diagnostic 4-component adjoint profile over the grid.
inline adjoint_profile solve_adjoint_trajectory(const control_net& net,
                                                const cost_spec& cost,
                                                const epidemic_params& params,
                                                const sir_state& init, int steps,
                                                objective_mode mode) {
  const control_tape tape = make_control_tape(net, cost, params, steps, true);
  forward_solution fwd = integrate_forward(tape, cost, params, init, mode);
  adjoint_profile profile;
  std::array<double, kNetParams> grad;
  backward_pass(tape, fwd, cost, params, mode, &grad, &profile);
  return profile;
}

}  // namespace epiopt
