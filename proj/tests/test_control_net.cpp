#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "epiopt/control_net.hpp"

using namespace epiopt;
using Catch::Matchers::WithinAbs;

namespace {

// Independent straight-line re-evaluation from the structured view; shares no
// code with control_net::forward.
double reference_forward(const control_net& net, double t) {
  const net_blocks b = net.unflatten();
  const double x = t / net.time_scale;
  std::array<double, 10> z, zn;
  for (int i = 0; i < 10; ++i) z[i] = std::tanh(b.W0[i] * x + b.b0[i]);
  const std::array<const std::array<double, 100>*, 4> mats{&b.W1, &b.W2, &b.W3, &b.W4};
  const std::array<const std::array<double, 10>*, 4> biases{&b.b1, &b.b2, &b.b3, &b.b4};
  for (int l = 0; l < 4; ++l) {
    for (int i = 0; i < 10; ++i) {
      double a = (*biases[l])[i];
      for (int j = 0; j < 10; ++j) a += (*mats[l])[10 * i + j] * z[j];
      zn[i] = std::tanh(a);
    }
    z = zn;
  }
  double u = b.b5;
  for (int i = 0; i < 10; ++i) u += b.w5[i] * z[i];
  return u;
}

control_net random_net(std::mt19937_64& gen, double time_scale) {
  control_net net;
  net.time_scale = time_scale;
  std::uniform_real_distribution<double> dist(-0.7, 0.7);
  for (double& v : net.theta) v = dist(gen);
  return net;
}

}  // namespace

TEST_CASE("param_count counts weights and biases") {
  const int deep[] = {1, 10, 10, 10, 10, 10, 1};
  const int affine[] = {1, 1};
  const int small[] = {1, 10, 1};
  CHECK(param_count(deep) == 471);
  CHECK(param_count(deep) == kNetParams);
  CHECK(param_count(affine) == 2);
  CHECK(param_count(small) == 31);
}

TEST_CASE("zero and constant nets") {
  const control_net zero = control_net::zeros(120.0);
  CHECK(zero.forward(0.0) == 0.0);
  CHECK(zero.forward(77.3) == 0.0);
  CHECK(zero.du_dt(12.0) == 0.0);

  control_net constant = control_net::zeros(120.0);
  constant.theta[net_layout::b5] = 0.3;
  CHECK(constant.forward(0.0) == 0.3);
  CHECK(constant.forward(119.0) == 0.3);
  CHECK(constant.du_dt(50.0) == 0.0);
}

TEST_CASE("forward matches an independent re-evaluation") {
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 20; ++rep) {
    const control_net net = random_net(gen, rep % 2 ? 120.0 : 1.0);
    for (double t : {0.0, 0.5, 13.0, 60.0, 120.0})
      REQUIRE_THAT(net.forward(t), WithinAbs(reference_forward(net, t), 1e-15));
  }
}

TEST_CASE("gradient components for trivial cases") {
  const control_net zero = control_net::zeros(120.0);
  std::array<double, kNetParams> g{};
  zero.grad_theta(35.0, g.data());
  CHECK(g[net_layout::b5] == 1.0);
  for (int i = 0; i < 10; ++i) CHECK(g[net_layout::w5 + i] == 0.0);
}

TEST_CASE("grad_theta and du_dt match central finite differences") {
  std::mt19937_64 gen(2026);
  std::uniform_real_distribution<double> tdist(0.0, 120.0);
  double worst_rel = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    control_net net = random_net(gen, rep % 2 ? 120.0 : 8.0);
    const double t = tdist(gen);

    std::array<double, kNetParams> g;
    net.grad_theta(t, g.data());
    const double eps = 1e-5;
    for (int j = 0; j < kNetParams; ++j) {
      const double saved = net.theta[j];
      net.theta[j] = saved + eps;
      const double hi = net.forward(t);
      net.theta[j] = saved - eps;
      const double lo = net.forward(t);
      net.theta[j] = saved;
      const double fd = (hi - lo) / (2.0 * eps);
      const double rel = std::fabs(g[j] - fd) /
                         std::max({std::fabs(g[j]), std::fabs(fd), 1e-4});
      worst_rel = std::max(worst_rel, rel);
    }

    const double dt = 1e-5;
    const double fd_t = (net.forward(t + dt) - net.forward(t - dt)) / (2.0 * dt);
    const double an_t = net.du_dt(t);
    const double rel_t =
        std::fabs(an_t - fd_t) / std::max({std::fabs(an_t), std::fabs(fd_t), 1e-4});
    REQUIRE(rel_t <= 1e-6);
  }
  REQUIRE(worst_rel <= 1e-6);
}

TEST_CASE("flatten and unflatten round trip exactly") {
  std::mt19937_64 gen(99);
  const control_net net = random_net(gen, 120.0);
  const control_net back = control_net::flatten(net.unflatten(), net.time_scale);
  REQUIRE(back.theta == net.theta);
  REQUIRE(back.time_scale == net.time_scale);
}

TEST_CASE("xavier initialization: bounds, zero biases, determinism") {
  const double b_edge = std::sqrt(6.0 / 11.0);
  const double b_mid = std::sqrt(6.0 / 20.0);
  const control_net a = control_net::init_xavier(42, 120.0);
  const control_net b = control_net::init_xavier(42, 120.0);
  const control_net c = control_net::init_xavier(43, 120.0);
  REQUIRE(a.theta == b.theta);
  REQUIRE(a.theta != c.theta);

  const net_blocks blocks = a.unflatten();
  CHECK(blocks.b5 == 0.0);
  for (int i = 0; i < 10; ++i) {
    CHECK(blocks.b0[i] == 0.0);
    CHECK(blocks.b1[i] == 0.0);
    CHECK(blocks.b2[i] == 0.0);
    CHECK(blocks.b3[i] == 0.0);
    CHECK(blocks.b4[i] == 0.0);
    CHECK(std::fabs(blocks.w5[i]) <= b_edge);
    CHECK(std::fabs(blocks.W0[i]) <= b_edge);
  }
  for (int i = 0; i < 100; ++i) {
    CHECK(std::fabs(blocks.W4[i]) <= b_mid);
    CHECK(std::fabs(blocks.W1[i]) <= b_mid);
  }
  CHECK(b_mid == Catch::Approx(0.5477).margin(1e-4));
}

TEST_CASE("xavier nets start with |u| < 1 across 100 seeds") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    for (double ts : {1.0, 120.0}) {
      const control_net net = control_net::init_xavier(seed, ts);
      CHECK(net.forward(0.0) == 0.0);  // all biases zero
      for (int k = 0; k <= 120; ++k) {
        const double u = net.forward(static_cast<double>(k));
        REQUIRE(std::fabs(u) < 1.0);
      }
    }
  }
}

TEST_CASE("eval_grid matches pointwise evaluation") {
  std::mt19937_64 gen(5);
  const control_net net = random_net(gen, 120.0);
  std::vector<double> times;
  for (int k = 0; k <= 50; ++k) times.push_back(2.4 * k);
  const control_net::batch b = net.eval_grid(times, true);
  REQUIRE(b.u.size() == times.size());
  REQUIRE(b.grad.size() == times.size() * kNetParams);
  std::array<double, kNetParams> g;
  for (std::size_t k = 0; k < times.size(); k += 7) {
    CHECK(b.u[k] == net.forward(times[k]));
    CHECK(b.du[k] == net.du_dt(times[k]));
    net.grad_theta(times[k], g.data());
    for (int j = 0; j < kNetParams; ++j) REQUIRE(b.grad[k * kNetParams + j] == g[j]);
  }
}

TEST_CASE("output clamp restricts the range without touching interior values") {
  control_net net = control_net::zeros(120.0);
  net.theta[net_layout::b5] = 1.7;
  net.clamp_output = true;
  CHECK(net.forward(10.0) == 1.0 - 1e-6);
  net.theta[net_layout::b5] = -0.4;
  CHECK(net.forward(10.0) == 0.0);
  net.theta[net_layout::b5] = 0.37;
  CHECK(net.forward(10.0) == 0.37);
  net.clamp_output = false;
  net.theta[net_layout::b5] = 1.7;
  CHECK(net.forward(10.0) == 1.7);
}
