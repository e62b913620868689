#pragma once

// Costate (Pontryagin multiplier) system for the terminal objective
// S(0) - S(T) + lambda * integral of c(u), in the convention
//   p1' = -beta (p2 - p1)(1 - u) I
//   p2' = -beta (p2 - p1)(1 - u) S + gamma p2
//   p1(T) = -1,  p2(T) = 0,  p3 = 0 identically.
// Note this differs by sign from the neural-ODE adjoint in adjoint.hpp
// (there P(T) = (0,0,0,1) on the augmented state and a(0) = +dJ/dtheta);
// the two are related by p = -(P_s, P_i, P_r) up to the running-cost share.
//
// The multiplier q of the constraint u >= 0 is reconstructed from
// complementarity: q = 0 wherever u > 0, else q = lambda c'(u) + beta S I (p1 - p2).

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "epiopt/control_net.hpp"
#include "epiopt/cost.hpp"
#include "epiopt/errors.hpp"
#include "epiopt/sir.hpp"

namespace epiopt {

struct costate_solution {
  std::vector<double> t;
  std::vector<double> p1, p2, p3;
  std::vector<double> q;
};

namespace detail {

// Node derivatives of the control by 4th-order central differences in the
// interior (lower order near the boundary), used only to interpolate u to
// midpoints when no analytic control is available.
inline std::vector<double> fd_du(const std::vector<double>& u, double h) {
  const std::size_t n = u.size();
  std::vector<double> du(n, 0.0);
  if (n < 2) return du;
  du[0] = (u[1] - u[0]) / h;
  du[n - 1] = (u[n - 1] - u[n - 2]) / h;
  if (n >= 3) {
    du[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    du[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (k >= 2 && k + 2 < n)
      du[k] = (u[k - 2] - 8.0 * u[k - 1] + 8.0 * u[k + 1] - u[k + 2]) / (12.0 * h);
    else
      du[k] = (u[k + 1] - u[k - 1]) / (2.0 * h);
  }
  return du;
}

}  // namespace detail

// Backward RK4 of the reduced 2-dimensional costate over a stored forward
// trajectory. The control at stage midpoints comes from `u_mid(k)` giving
// u(t_k + h/2); states are interpolated with the cubic-Hermite midpoint rule.
template <class UMid>
costate_solution solve_costate_with(const trajectory& traj, const epidemic_params& params,
                                    const cost_spec& cost, UMid&& u_mid) {
  const std::size_t n = traj.nodes();
  if (n < 2) throw config_error("solve_costate: trajectory too short");
  const double h = traj.step();

  // Node values of f for Hermite interpolation of (S, I).
  std::vector<std::array<double, 3>> f(n);
  for (std::size_t k = 0; k < n; ++k) f[k] = dynamics(traj.x[k], traj.u[k], params);

  costate_solution cs;
  cs.t = traj.t;
  cs.p1.assign(n, 0.0);
  cs.p2.assign(n, 0.0);
  cs.p3.assign(n, 0.0);
  cs.q.assign(n, 0.0);
  cs.p1[n - 1] = -1.0;
  cs.p2[n - 1] = 0.0;

  auto rhs = [&params](double p1, double p2, double s, double i, double u,
                       double& d1, double& d2) {
    const double w = params.beta * (p2 - p1) * (1.0 - u);
    d1 = -w * i;
    d2 = -w * s + params.gamma * p2;
  };

  for (std::size_t k = n - 1; k >= 1; --k) {
    const double sR = traj.x[k].s, iR = traj.x[k].i, uR = traj.u[k];
    const double sL = traj.x[k - 1].s, iL = traj.x[k - 1].i, uL = traj.u[k - 1];
    const double sM = 0.5 * (sL + sR) + h * (f[k - 1][0] - f[k][0]) / 8.0;
    const double iM = 0.5 * (iL + iR) + h * (f[k - 1][1] - f[k][1]) / 8.0;
    const double uM = u_mid(k - 1);

    const double hb = -h;
    double a1, a2, b1, b2, c1, c2, d1, d2;
    double p1 = cs.p1[k], p2 = cs.p2[k];
    rhs(p1, p2, sR, iR, uR, a1, a2);
    rhs(p1 + 0.5 * hb * a1, p2 + 0.5 * hb * a2, sM, iM, uM, b1, b2);
    rhs(p1 + 0.5 * hb * b1, p2 + 0.5 * hb * b2, sM, iM, uM, c1, c2);
    rhs(p1 + hb * c1, p2 + hb * c2, sL, iL, uL, d1, d2);
    p1 += hb / 6.0 * (a1 + 2.0 * (b1 + c1) + d1);
    p2 += hb / 6.0 * (a2 + 2.0 * (b2 + c2) + d2);
    if (!std::isfinite(p1) || !std::isfinite(p2))
      throw integration_diverged("solve_costate: diverged", traj.t[k - 1]);
    cs.p1[k - 1] = p1;
    cs.p2[k - 1] = p2;
  }

  for (std::size_t k = 0; k < n; ++k) {
    if (traj.u[k] > 0.0) {
      cs.q[k] = 0.0;
    } else {
      const double bsi = params.beta * traj.x[k].s * traj.x[k].i;
      cs.q[k] = cost.lambda * cost.d1(traj.u[k]) + bsi * (cs.p1[k] - cs.p2[k]);
    }
  }
  return cs;
}

// Variant with an analytic control (stage-exact midpoint values).
inline costate_solution solve_costate(const trajectory& traj, const epidemic_params& params,
                                      const cost_spec& cost, const control_net& net) {
  const double h = traj.step();
  return solve_costate_with(traj, params, cost, [&](std::size_t k) {
    return net.forward(traj.t[k] + 0.5 * h);
  });
}

// Variant from node data alone: u interpolated to midpoints with the
// cubic-Hermite rule using finite-difference node slopes.
inline costate_solution solve_costate(const trajectory& traj, const epidemic_params& params,
                                      const cost_spec& cost) {
  const double h = traj.step();
  const std::vector<double> du = detail::fd_du(traj.u, h);
  return solve_costate_with(traj, params, cost, [&](std::size_t k) {
    return 0.5 * (traj.u[k] + traj.u[k + 1]) + h * (du[k] - du[k + 1]) / 8.0;
  });
}

}  // namespace epiopt
