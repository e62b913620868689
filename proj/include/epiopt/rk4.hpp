#pragma once

// Classical fixed-step 4th-order Runge-Kutta over small dense states.
// Steps may be negative (backward integration); the scheme is deterministic:
// identical inputs give bit-identical outputs.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "epiopt/errors.hpp"

namespace epiopt {

template <std::size_t N>
using vec = std::array<double, N>;

// Uniform grid from t_start to t_end in `steps` steps. The step h is negative
// when t_end < t_start, which integrates backward in time.
struct time_grid {
  double t_start = 0.0;
  double t_end = 1.0;
  int steps = 1;

  double step() const { return (t_end - t_start) / steps; }
  double node(int k) const {
    return (k == steps) ? t_end : t_start + k * step();
  }
  void validate() const {
    if (steps < 1) throw config_error("time_grid: steps must be >= 1");
    if (!std::isfinite(t_start) || !std::isfinite(t_end) || t_start == t_end)
      throw config_error("time_grid: degenerate time span");
  }
};

namespace detail {

template <std::size_t N>
bool finite(const vec<N>& y) {
  for (double v : y)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace detail

// One classical RK4 update y + (h/6)(k1 + 2 k2 + 2 k3 + k4).
// rhs: (t, y) -> dy/dt. Throws integration_diverged if a stage is non-finite.
template <std::size_t N, class Rhs>
vec<N> rk4_step(Rhs&& rhs, double t, const vec<N>& y, double h) {
  const vec<N> k1 = rhs(t, y);
  vec<N> tmp;
  for (std::size_t j = 0; j < N; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
  const vec<N> k2 = rhs(t + 0.5 * h, tmp);
  for (std::size_t j = 0; j < N; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
  const vec<N> k3 = rhs(t + 0.5 * h, tmp);
  for (std::size_t j = 0; j < N; ++j) tmp[j] = y[j] + h * k3[j];
  const vec<N> k4 = rhs(t + h, tmp);
  vec<N> out;
  for (std::size_t j = 0; j < N; ++j)
    out[j] = y[j] + h / 6.0 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]);
  if (!detail::finite(out)) throw integration_diverged("rk4_step: non-finite state", t);
  return out;
}

// Integrate over all grid nodes; output[k] is the state at grid.node(k),
// output[0] = y0. Throws integration_diverged on non-finite states.
template <std::size_t N, class Rhs>
std::vector<vec<N>> integrate(Rhs&& rhs, const vec<N>& y0, const time_grid& grid) {
  grid.validate();
  if (!detail::finite(y0)) throw integration_diverged("integrate: non-finite y0", grid.t_start);
  std::vector<vec<N>> out(static_cast<std::size_t>(grid.steps) + 1);
  out[0] = y0;
  const double h = grid.step();
  for (int k = 0; k < grid.steps; ++k)
    out[k + 1] = rk4_step(rhs, grid.node(k), out[k], h);
  return out;
}

}  // namespace epiopt
