#pragma once

#include <stdexcept>
#include <string>

namespace epiopt {

// Base class for all library failures.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// A state or stage value became non-finite during integration.
class integration_diverged : public error {
 public:
  integration_diverged(const std::string& what, double t)
      : error(what + " (t=" + std::to_string(t) + ")"), t_(t) {}
  double where() const { return t_; }

 private:
  double t_;
};

// A control value left the domain of a barrier cost.
class cost_domain_error : public error {
 public:
  cost_domain_error(const std::string& what, double u, double t)
      : error(what + " (u=" + std::to_string(u) + ", t=" + std::to_string(t) + ")"),
        u_(u),
        t_(t) {}
  double offending_u() const { return u_; }
  double offending_t() const { return t_; }

 private:
  double u_;
  double t_;
};

// Numerical failure outside integration (non-finite gradient, quadrature, ...).
class numerical_error : public error {
 public:
  using error::error;
};

// Training could not take an acceptable step.
class training_failed : public error {
 public:
  using error::error;
};

// Bad configuration file or flag combination.
class config_error : public error {
 public:
  using error::error;
};

// Filesystem failure while writing or reading artifacts.
class io_error : public error {
 public:
  using error::error;
};

}  // namespace epiopt
