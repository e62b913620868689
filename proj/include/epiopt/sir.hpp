#pragma once

// Controlled SIR vector field on normalized states (s + i + r = 1):
//   s' = -beta (1-u) s i
//   i' =  beta (1-u) s i - gamma i
//   r' =  gamma i
// The control u scales down transmission; u is not range-checked here (the
// formulas are total), admissibility is enforced where controls are produced.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace epiopt {

struct epidemic_params {
  double beta = 0.3;         // transmission rate, 1/day
  double gamma = 0.1;        // recovery rate, 1/day
  double population = 1e7;   // total headcount N
  double horizon = 120.0;    // study period T, days

  double basic_reproduction() const { return beta / gamma; }

  void validate() const {
    if (!(beta > 0.0) || !(gamma > 0.0))
      throw std::invalid_argument("epidemic_params: rates must be positive");
    if (!(population >= 1.0))
      throw std::invalid_argument("epidemic_params: population must be >= 1");
    if (!(horizon > 0.0))
      throw std::invalid_argument("epidemic_params: horizon must be positive");
  }
};

struct sir_state {
  double s = 0.0;
  double i = 0.0;
  double r = 0.0;

  double sum() const { return (s + r) + i; }
};

// Trajectory on a uniform grid: node times, states and control values.
struct trajectory {
  std::vector<double> t;
  std::vector<sir_state> x;
  std::vector<double> u;

  std::size_t nodes() const { return t.size(); }
  double step() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
};

namespace detail {

inline void require_finite(const sir_state& x, double u) {
  if (!std::isfinite(x.s) || !std::isfinite(x.i) || !std::isfinite(x.r) ||
      !std::isfinite(u))
    throw std::invalid_argument("sir dynamics: non-finite input");
}

}  // namespace detail

// Vector field (f1, f2, f3). The middle component is assembled as -(f1 + f3)
// so that (f1 + f3) + f2 vanishes exactly in floating point.
inline std::array<double, 3> dynamics(const sir_state& x, double u,
                                      const epidemic_params& p) {
  detail::require_finite(x, u);
  const double bsi = p.beta * x.s * x.i;
  const double f1 = u * bsi - bsi;  // -beta (1-u) s i
  const double f3 = p.gamma * x.i;
  const double f2 = -(f1 + f3);
  return {f1, f2, f3};
}

// d f / d(s, i, r); rows are components of f, columns the state variables.
inline std::array<std::array<double, 3>, 3> jacobian_state(
    const sir_state& x, double u, const epidemic_params& p) {
  detail::require_finite(x, u);
  const double bi = p.beta * (1.0 - u) * x.i;
  const double bs = p.beta * (1.0 - u) * x.s;
  return {{{-bi, -bs, 0.0},
           {bi, bs - p.gamma, 0.0},
           {0.0, p.gamma, 0.0}}};
}

// d f / d u = (beta s i, -beta s i, 0); independent of u (f is affine in u).
inline std::array<double, 3> df_du(const sir_state& x, double /*u*/,
                                   const epidemic_params& p) {
  detail::require_finite(x, 0.0);
  const double bsi = p.beta * x.s * x.i;
  return {bsi, -bsi, 0.0};
}

// Effective reproduction number (beta/gamma)(1-u) S.
inline double effective_reproduction(const sir_state& x, double u,
                                     const epidemic_params& p) {
  detail::require_finite(x, u);
  return p.basic_reproduction() * (1.0 - u) * x.s;
}

}  // namespace epiopt
