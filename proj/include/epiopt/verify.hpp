#pragma once

// Numerical verification of the structural theory on trained solutions:
// simplex invariance of the SIR flow, the closed-form integral identities for
// S and R, the costate product identity, the decline onset tau of the control
// and the sign/stationarity structure of the optimality system.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "epiopt/control_net.hpp"
#include "epiopt/cost.hpp"
#include "epiopt/costate.hpp"
#include "epiopt/quadrature.hpp"
#include "epiopt/sir.hpp"

namespace epiopt {

struct simplex_report {
  double max_sum_dev = 0.0;   // max |s + i + r - 1|
  double min_component = 0.0; // min over s, i, r and nodes
};

inline simplex_report simplex_check(const trajectory& traj) {
  simplex_report rep;
  rep.min_component = 1.0;
  for (const sir_state& x : traj.x) {
    rep.max_sum_dev = std::max(rep.max_sum_dev, std::fabs(x.sum() - 1.0));
    rep.min_component = std::min({rep.min_component, x.s, x.i, x.r});
  }
  return rep;
}

struct closed_form_report {
  double max_dev_s = 0.0;  // vs S(0) exp(-integral beta (1-u) I)
  double max_dev_r = 0.0;  // vs R(0) + gamma integral I
};

// Trapezoidal cross-check of the quadrature forms of S and R.
inline closed_form_report closed_form_check(const trajectory& traj,
                                            const epidemic_params& params) {
  const std::size_t n = traj.nodes();
  closed_form_report rep;
  if (n < 2) return rep;
  const double h = traj.step();
  std::vector<double> force(n), infect(n);
  for (std::size_t k = 0; k < n; ++k) {
    force[k] = params.beta * (1.0 - traj.u[k]) * traj.x[k].i;
    infect[k] = traj.x[k].i;
  }
  const std::vector<double> cum_force = trapezoid_prefix(force, h);
  const std::vector<double> cum_i = trapezoid_prefix(infect, h);
  const double s0 = traj.x[0].s;
  const double r0 = traj.x[0].r;
  for (std::size_t k = 0; k < n; ++k) {
    rep.max_dev_s = std::max(rep.max_dev_s,
                             std::fabs(traj.x[k].s - s0 * std::exp(-cum_force[k])));
    rep.max_dev_r = std::max(rep.max_dev_r,
                             std::fabs(traj.x[k].r - (r0 + params.gamma * cum_i[k])));
  }
  return rep;
}

// Max deviation of d/dt [S I (p1 - p2)] from -gamma p1 S I over interior
// nodes, the time derivative taken by 4th-order central differences.
inline double costate_product_identity_dev(const trajectory& traj,
                                           const costate_solution& cs,
                                           const epidemic_params& params) {
  const std::size_t n = traj.nodes();
  if (n < 5) return 0.0;
  const double h = traj.step();
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k)
    g[k] = traj.x[k].s * traj.x[k].i * (cs.p1[k] - cs.p2[k]);
  double dev = 0.0;
  for (std::size_t k = 2; k + 2 < n; ++k) {
    const double dg = (g[k - 2] - 8.0 * g[k - 1] + 8.0 * g[k + 1] - g[k + 2]) / (12.0 * h);
    const double rhs = -params.gamma * cs.p1[k] * traj.x[k].s * traj.x[k].i;
    dev = std::max(dev, std::fabs(dg - rhs));
  }
  return dev;
}

namespace detail {

// Smallest grid time at which the trailing run of qualifying nodes begins.
// Returns T when only the final node qualifies (or none does).
inline double trailing_onset(const std::vector<double>& t, const std::vector<char>& ok) {
  const std::size_t n = t.size();
  if (n == 0) return 0.0;
  std::size_t k = n;
  while (k > 0 && ok[k - 1]) --k;
  if (k == n || k == n - 1) return t[n - 1];  // nothing, or the last node only
  return t[k];
}

}  // namespace detail

// Smallest grid time tau with du/dt <= tol at every node of [tau, T].
// Returns T when only the final node qualifies (or none does).
inline double detect_tau(const std::vector<double>& t, const std::vector<double>& du,
                         double tol = 1e-6) {
  std::vector<char> ok(du.size());
  for (std::size_t k = 0; k < du.size(); ++k) ok[k] = du[k] <= tol;
  return detail::trailing_onset(t, ok);
}

struct theorem_report {
  double tau = 0.0;                 // decline onset: du/dt <= tol on [tau, T]
  double tau_p1 = 0.0;              // p1 < 0 on [tau_p1, T]
  double tau_switch = 0.0;          // beta S I (p1 - p2) < 0 on [tau_switch, T]
  double tau_est = 0.0;             // beta gamma S I p1 / (lambda c''(u)) < 0
  double tau_structure = 0.0;       // all four conditions hold on [tau_structure, T]
  bool structure_ok = false;        // tau_structure < T: the window is nonempty
  double max_u = 0.0;
  double min_u = 0.0;
  bool hypotheses_met = false;      // barrier-type cost (c1..c3)
  bool sign_p1_negative = false;    // p1 < 0 already on the decline window [tau, T]
  bool sign_switch_negative = false;// switch < 0 already on [tau, T]
  bool sign_est_negative = false;   // est < 0 already on [tau, T]
  double kkt_max_abs = 0.0;         // max |lambda c'(u) + beta S I (p1 - p2)|
  double kkt_max_ratio = 0.0;       // normalized residual
  double uprime_max_abs_dev = 0.0;  // |du/dt - est|
  double uprime_max_rel_dev = 0.0;
  double uprime_sign_agreement = 1.0;
  double costate_identity_dev = 0.0;
  simplex_report simplex;
  closed_form_report closed_form;
};

// Structure report on a trained solution. The structural claim is an
// existence statement: some tau < T has, on all of [tau, T], a non-increasing
// control together with p1 < 0, switch = beta S I (p1 - p2) < 0 and
// est = beta gamma S I p1 / (lambda c''(u)) < 0. The terminal conditions
// p1(T) = -1, p2(T) = 0 anchor the sign windows; the decline window is the
// falsifiable part. tau_structure is the latest of the four onsets, so the
// claim holds iff tau_structure < T. The sign_* flags additionally record
// whether each sign already holds on the full decline window [tau, T], which
// an exact optimizer satisfies but an approximately stationary one need not.
inline theorem_report verify_theorem(const control_net& net, const trajectory& traj,
                                     const costate_solution& cs, const cost_spec& cost,
                                     const epidemic_params& params) {
  const std::size_t n = traj.nodes();
  theorem_report rep;
  rep.hypotheses_met = cost.kind != cost_kind::c4;
  rep.simplex = simplex_check(traj);
  rep.closed_form = closed_form_check(traj, params);
  rep.costate_identity_dev = costate_product_identity_dev(traj, cs, params);
  if (n == 0) return rep;

  std::vector<double> du(n), sw(n), est(n);
  std::vector<char> ok_p1(n), ok_sw(n), ok_est(n);
  for (std::size_t k = 0; k < n; ++k) {
    du[k] = net.du_dt(traj.t[k]);
    const double s = traj.x[k].s, i = traj.x[k].i;
    sw[k] = params.beta * s * i * (cs.p1[k] - cs.p2[k]);
    est[k] = params.beta * params.gamma * s * i * cs.p1[k] /
             (cost.lambda * cost.d2(traj.u[k]));
    ok_p1[k] = cs.p1[k] < 0.0;
    ok_sw[k] = sw[k] < 0.0;
    ok_est[k] = est[k] < 0.0;
  }
  rep.tau = detect_tau(traj.t, du);
  rep.tau_p1 = detail::trailing_onset(traj.t, ok_p1);
  rep.tau_switch = detail::trailing_onset(traj.t, ok_sw);
  rep.tau_est = detail::trailing_onset(traj.t, ok_est);
  rep.tau_structure = std::max({rep.tau, rep.tau_p1, rep.tau_switch, rep.tau_est});
  rep.structure_ok = rep.tau_structure < traj.t.back();
  rep.max_u = *std::max_element(traj.u.begin(), traj.u.end());
  rep.min_u = *std::min_element(traj.u.begin(), traj.u.end());

  rep.sign_p1_negative = rep.tau_p1 <= rep.tau;
  rep.sign_switch_negative = rep.tau_switch <= rep.tau;
  rep.sign_est_negative = rep.tau_est <= rep.tau;
  std::size_t tail = 0, agree = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (traj.t[k] < rep.tau - 1e-12) continue;
    ++tail;
    const double resid = cost.lambda * cost.d1(traj.u[k]) + sw[k];
    rep.kkt_max_abs = std::max(rep.kkt_max_abs, std::fabs(resid));
    const double scale = std::fabs(cost.lambda * cost.d1(traj.u[k])) + std::fabs(sw[k]);
    if (scale > 0.0)
      rep.kkt_max_ratio = std::max(rep.kkt_max_ratio, std::fabs(resid) / scale);

    const double dev = du[k] - est[k];
    rep.uprime_max_abs_dev = std::max(rep.uprime_max_abs_dev, std::fabs(dev));
    if (std::fabs(est[k]) > 1e-12)
      rep.uprime_max_rel_dev =
          std::max(rep.uprime_max_rel_dev, std::fabs(dev) / std::fabs(est[k]));
    if ((du[k] <= 0.0) == (est[k] <= 0.0)) ++agree;
  }
  rep.uprime_sign_agreement = tail ? static_cast<double>(agree) / tail : 1.0;
  return rep;
}

}  // namespace epiopt
