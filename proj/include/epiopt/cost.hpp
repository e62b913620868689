#pragma once

// Running-cost functions for the control effort and the weighted least-squares
// calibration that fixes their coefficients against the shifted-log reference:
//   c1(u) = -a1 ln(1 - u^2)        |u| < 1
//   c2(u) = -a2 u ln(1 - u)         u  < 1
//   c3(u) = -(u + ln(1 - u))        u  < 1   (reference, weight 1)
//   c4(u) =  a4 u^2                 all u    (no barrier)
// All are smooth, convex, vanish at 0 with c'(0) = 0, and c1-c3 grow without
// bound as u -> 1.

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "epiopt/errors.hpp"
#include "epiopt/quadrature.hpp"

namespace epiopt {

enum class cost_kind { c1, c2, c3, c4 };

inline const char* to_string(cost_kind k) {
  switch (k) {
    case cost_kind::c1: return "c1";
    case cost_kind::c2: return "c2";
    case cost_kind::c3: return "c3";
    case cost_kind::c4: return "c4";
  }
  return "?";
}

inline cost_kind cost_kind_from_string(const std::string& s) {
  if (s == "c1") return cost_kind::c1;
  if (s == "c2") return cost_kind::c2;
  if (s == "c3") return cost_kind::c3;
  if (s == "c4") return cost_kind::c4;
  throw config_error("unknown cost kind: " + s);
}

// Unit-weight cost bases and their derivatives.
namespace cost_base {

inline double value(cost_kind k, double u) {
  switch (k) {
    case cost_kind::c1: return -std::log1p(-u * u);
    case cost_kind::c2: return -u * std::log1p(-u);
    case cost_kind::c3: return -(u + std::log1p(-u));
    case cost_kind::c4: return u * u;
  }
  return 0.0;
}

inline double d1(cost_kind k, double u) {
  switch (k) {
    case cost_kind::c1: return 2.0 * u / (1.0 - u * u);
    case cost_kind::c2: return -std::log1p(-u) + u / (1.0 - u);
    case cost_kind::c3: return u / (1.0 - u);
    case cost_kind::c4: return 2.0 * u;
  }
  return 0.0;
}

inline double d2(cost_kind k, double u) {
  switch (k) {
    case cost_kind::c1: {
      const double d = 1.0 - u * u;
      return 2.0 * (1.0 + u * u) / (d * d);
    }
    case cost_kind::c2: {
      const double d = 1.0 - u;
      return 1.0 / d + 1.0 / (d * d);
    }
    case cost_kind::c3: {
      const double d = 1.0 - u;
      return 1.0 / (d * d);
    }
    case cost_kind::c4: return 2.0;
  }
  return 0.0;
}

inline bool in_domain(cost_kind k, double u) {
  if (!std::isfinite(u)) return false;
  switch (k) {
    case cost_kind::c1: return std::fabs(u) < 1.0;
    case cost_kind::c2: return u < 1.0;
    case cost_kind::c3: return u < 1.0;
    case cost_kind::c4: return true;
  }
  return false;
}

}  // namespace cost_base

// Least-squares coefficient a = <w b, ref> / <w b, b> with weight
// w(z) = sqrt(1 - z^2), evaluated on the calibration grid z = 0, 0.01, ..., 0.99.
// This discrete projection is what produces the reference six-digit
// coefficients; see calibrate_weight_continuum for the integral version.
template <class Base, class Ref>
double calibrate_weight(Base&& base, Ref&& ref) {
  double num = 0.0, den = 0.0;
  for (int j = 0; j < 100; ++j) {
    const double z = j / 100.0;
    const double w = std::sqrt(1.0 - z * z);
    const double b = base(z);
    num += w * b * ref(z);
    den += w * b * b;
  }
  if (!(den > 0.0) || !std::isfinite(num))
    throw numerical_error("calibrate_weight: degenerate projection");
  return num / den;
}

// Continuum analogue: a = integral(w b ref) / integral(w b^2) over [0, 1).
// Substituting z = sin(phi) removes the sqrt endpoint singularity; the
// integrable log singularity of the barrier bases at z -> 1 is handled by
// geometric panel refinement toward phi = pi/2.
template <class Base, class Ref>
double calibrate_weight_continuum(Base&& base, Ref&& ref) {
  const double half_pi = std::asin(1.0);
  auto integrand = [&](auto&& g) {
    return [&, g](double phi) {
      const double z = std::sin(phi);
      const double c = std::cos(phi);
      return c * c * g(z);
    };
  };
  auto num_f = integrand([&](double z) { return base(z) * ref(z); });
  auto den_f = integrand([&](double z) { return base(z) * base(z); });
  const double num = gauss5_endpoint_refined(num_f, 0.0, half_pi);
  const double den = gauss5_endpoint_refined(den_f, 0.0, half_pi);
  if (!(den > 0.0)) throw numerical_error("calibrate_weight_continuum: degenerate");
  return num / den;
}

// A concrete running cost: kind, calibrated weight, regularization lambda.
struct cost_spec {
  cost_kind kind = cost_kind::c3;
  double weight = 1.0;
  double lambda = 0.05;

  // Calibrated coefficients from the discrete weighted projection.
  static double calibrated_weight(cost_kind k) {
    if (k == cost_kind::c3) return 1.0;
    auto ref = [](double z) { return cost_base::value(cost_kind::c3, z); };
    auto base = [k](double z) { return cost_base::value(k, z); };
    return calibrate_weight(base, ref);
  }

  static cost_spec make(cost_kind k, double lambda) {
    if (!(lambda > 0.0)) throw config_error("cost_spec: lambda must be positive");
    return cost_spec{k, calibrated_weight(k), lambda};
  }

  bool in_domain(double u) const { return cost_base::in_domain(kind, u); }

  void require_domain(double u, double t = std::numeric_limits<double>::quiet_NaN()) const {
    if (!in_domain(u))
      throw cost_domain_error(std::string("control left the domain of ") + to_string(kind),
                              u, t);
  }

  double value(double u) const {
    require_domain(u);
    return weight * cost_base::value(kind, u);
  }
  double d1(double u) const {
    require_domain(u);
    return weight * cost_base::d1(kind, u);
  }
  double d2(double u) const {
    require_domain(u);
    return weight * cost_base::d2(kind, u);
  }
};

}  // namespace epiopt
