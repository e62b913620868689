#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "epiopt/rk4.hpp"

using namespace epiopt;

namespace {

// y' = y, y(0) = 1; one classical RK4 step of h = 0.1.
constexpr double kExpStep = 1.1051708333333333;

vec<1> exp_rhs(double, const vec<1>& y) { return {y[0]}; }

}  // namespace

TEST_CASE("rk4_step reproduces the hand-computed exponential step") {
  const vec<1> y1 = rk4_step<1>(exp_rhs, 0.0, {1.0}, 0.1);
  REQUIRE_THAT(y1[0], Catch::Matchers::WithinAbs(kExpStep, 1e-15));
}

TEST_CASE("rk4_step handles multi-component systems") {
  // x' = v, v' = -x (harmonic oscillator), energy preserved to O(h^4) locally.
  auto rhs = [](double, const vec<2>& y) { return vec<2>{y[1], -y[0]}; };
  vec<2> y = {1.0, 0.0};
  const double h = 0.01;
  for (int k = 0; k < 100; ++k) y = rk4_step<2>(rhs, k * h, y, h);
  REQUIRE_THAT(y[0], Catch::Matchers::WithinAbs(std::cos(1.0), 1e-9));
  REQUIRE_THAT(y[1], Catch::Matchers::WithinAbs(-std::sin(1.0), 1e-9));
}

TEST_CASE("integrate converges at fourth order under grid halving") {
  auto err_at = [](std::size_t steps) {
    const time_grid grid{0.0, 1.0, steps};
    const auto ys = integrate<1>(exp_rhs, {1.0}, grid);
    return std::fabs(ys.back()[0] - std::exp(1.0));
  };
  const double ratio = err_at(16) / err_at(32);
  REQUIRE(ratio > 16.0 * 0.9);
  REQUIRE(ratio < 16.0 * 1.1);
}

TEST_CASE("backward integration reverses the forward pass") {
  // Integrate a nonlinear system forward, then step backward with -h and
  // compare to the initial state.
  auto rhs = [](double t, const vec<2>& y) {
    return vec<2>{-0.3 * y[0] * y[1], 0.3 * y[0] * y[1] - 0.1 * y[1] + 0.01 * std::sin(t)};
  };
  const time_grid grid{0.0, 10.0, 200};
  const auto ys = integrate<2>(rhs, {0.99, 0.01}, grid);
  vec<2> back = ys.back();
  const double h = grid.step();
  for (int k = grid.steps; k-- > 0;)
    back = rk4_step<2>(rhs, grid.node(k + 1), back, -h);
  REQUIRE_THAT(back[0], Catch::Matchers::WithinAbs(0.99, 1e-8));
  REQUIRE_THAT(back[1], Catch::Matchers::WithinAbs(0.01, 1e-8));
}

TEST_CASE("time_grid nodes hit the endpoints exactly") {
  const time_grid grid{0.0, 120.0, 7};  // 120/7 is not representable
  REQUIRE(grid.node(0) == 0.0);
  REQUIRE(grid.node(7) == 120.0);
  REQUIRE(grid.node(3) == Catch::Approx(3 * 120.0 / 7).margin(1e-12));
}

TEST_CASE("time_grid validation rejects degenerate grids") {
  REQUIRE_THROWS_AS((time_grid{0.0, 1.0, 0}.validate()), config_error);
  REQUIRE_THROWS_AS((time_grid{1.0, 1.0, 10}.validate()), config_error);
  REQUIRE_THROWS_AS(
      (time_grid{0.0, std::numeric_limits<double>::quiet_NaN(), 10}.validate()),
      config_error);
}

TEST_CASE("non-finite dynamics raise integration_diverged") {
  auto rhs = [](double, const vec<1>& y) {
    return vec<1>{y[0] > 2.0 ? std::numeric_limits<double>::infinity() : y[0] * y[0] * 10.0};
  };
  const time_grid grid{0.0, 10.0, 100};
  try {
    integrate<1>(rhs, {1.0}, grid);
    FAIL("expected integration_diverged");
  } catch (const integration_diverged& e) {
    REQUIRE(e.where() >= 0.0);
    REQUIRE(e.where() <= 10.0);
  }
}
