#pragma once

// Small deterministic quadrature helpers: composite 5-point Gauss-Legendre
// (with geometric refinement toward a singular right endpoint) and trapezoid
// sums over tabulated values.

#include <cmath>
#include <cstddef>
#include <vector>

#include "epiopt/errors.hpp"

namespace epiopt {

// 5-point Gauss-Legendre on [a, b].
template <class F>
double gauss5(F&& f, double a, double b) {
  static const double xs[5] = {-0.9061798459386639928, -0.5384693101056830910, 0.0,
                               0.5384693101056830910, 0.9061798459386639928};
  static const double ws[5] = {0.2369268850561890875, 0.4786286704993664680,
                               0.5688888888888888889, 0.4786286704993664680,
                               0.2369268850561890875};
  const double mid = 0.5 * (a + b);
  const double hal = 0.5 * (b - a);
  double acc = 0.0;
  for (int j = 0; j < 5; ++j) acc += ws[j] * f(mid + hal * xs[j]);
  return hal * acc;
}

// Composite Gauss-Legendre with n equal panels.
template <class F>
double gauss5_composite(F&& f, double a, double b, int panels) {
  double acc = 0.0;
  const double h = (b - a) / panels;
  for (int k = 0; k < panels; ++k) acc += gauss5(f, a + k * h, a + (k + 1) * h);
  return acc;
}

// Integral over [a, b] of a function with an integrable singularity at b:
// panels shrink geometrically toward b (depth halvings), each resolved by
// composite Gauss-Legendre. Deterministic; accuracy well below 1e-9 for the
// log-type singularities used here.
template <class F>
double gauss5_endpoint_refined(F&& f, double a, double b, int depth = 48,
                               int panels = 8) {
  double acc = 0.0;
  double right = b;
  double len = (b - a) * 0.5;
  double left = b - len;
  for (int k = 0; k < depth; ++k) {
    acc += gauss5_composite(f, left, right, panels);
    right = left;
    len *= 0.5;
    left = right - len;
    if (!(left > a) || len <= 0.0) break;
  }
  acc += gauss5_composite(f, a, right, panels);
  if (!std::isfinite(acc)) throw numerical_error("gauss5_endpoint_refined: non-finite");
  return acc;
}

// Trapezoid sum of tabulated values on a uniform grid with step h.
inline double trapezoid(const std::vector<double>& v, double h) {
  if (v.size() < 2) return 0.0;
  double acc = 0.5 * (v.front() + v.back());
  for (std::size_t k = 1; k + 1 < v.size(); ++k) acc += v[k];
  return acc * h;
}

// Running trapezoid prefix integrals: out[k] = integral over [t0, tk].
inline std::vector<double> trapezoid_prefix(const std::vector<double>& v, double h) {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t k = 1; k < v.size(); ++k)
    out[k] = out[k - 1] + 0.5 * h * (v[k - 1] + v[k]);
  return out;
}

}  // namespace epiopt
