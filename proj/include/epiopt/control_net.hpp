#pragma once

// The control parameterization u_theta(t): a 1-10-10-10-10-10-1 tanh network
// with a flat 471-entry parameter vector
//   theta = (w5, W4, W3, W2, W1, W0, b5, b4, b3, b2, b1, b0)
// (matrices row-major). Forward evaluation, the exact time derivative and
// hand-written reverse-mode d u / d theta; no autodiff framework involved.
// The scalar input is normalized as z0 = t / time_scale before layer 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <span>
#include <vector>

#include "epiopt/errors.hpp"

namespace epiopt {

inline constexpr int kNetParams = 471;
inline constexpr int kHidden = 10;

// Offsets of the blocks inside theta.
namespace net_layout {
inline constexpr int w5 = 0;    // 10
inline constexpr int W4 = 10;   // 100
inline constexpr int W3 = 110;  // 100
inline constexpr int W2 = 210;  // 100
inline constexpr int W1 = 310;  // 100
inline constexpr int W0 = 410;  // 10
inline constexpr int b5 = 420;  // 1
inline constexpr int b4 = 421;  // 10
inline constexpr int b3 = 431;  // 10
inline constexpr int b2 = 441;  // 10
inline constexpr int b1 = 451;  // 10
inline constexpr int b0 = 461;  // 10
}  // namespace net_layout

// Parameter count of a dense feed-forward architecture given layer sizes.
inline int param_count(std::span<const int> layers) {
  int n = 0;
  for (std::size_t k = 0; k + 1 < layers.size(); ++k)
    n += layers[k] * layers[k + 1] + layers[k + 1];
  return n;
}

// Structured view of theta for round-tripping and inspection.
struct net_blocks {
  std::array<double, 10> w5;
  std::array<double, 100> W4, W3, W2, W1;
  std::array<double, 10> W0;
  double b5;
  std::array<double, 10> b4, b3, b2, b1, b0;
};

struct control_net {
  std::array<double, kNetParams> theta{};
  double time_scale = 1.0;
  // Post-hoc clamp of the output to [0, 1 - 1e-6]. Diagnostic/export use
  // only: du_dt and grad_theta keep the unclamped semantics, so training
  // with the clamp active would see inconsistent gradients. Default off.
  bool clamp_output = false;

  static control_net zeros(double time_scale) {
    control_net n;
    n.time_scale = time_scale;
    return n;
  }

  // Xavier-uniform weights (bound sqrt(6/(fan_in+fan_out)) per matrix), biases
  // zero. Weight blocks are drawn in theta layout order from mt19937_64; the
  // uniform variate is (x >> 11) * 2^-53 for cross-platform determinism.
  //
  // A draw whose control leaves (-1, 1) anywhere on the standard input range
  // z0 in [0, 120] is redrawn from the continuing stream: barrier costs cannot
  // evaluate an inadmissible control, so such a start could never train.
  static control_net init_xavier(std::uint64_t seed, double time_scale) {
    control_net n;
    n.time_scale = time_scale;
    std::mt19937_64 gen(seed);
    auto unit = [&gen]() {
      return static_cast<double>(gen() >> 11) * 0x1.0p-53;
    };
    auto block = [&](int off, int count, double bound) {
      for (int j = 0; j < count; ++j)
        n.theta[off + j] = -bound + 2.0 * bound * unit();
    };
    const double b_edge = std::sqrt(6.0 / (1.0 + kHidden));  // 1<->10 layers
    const double b_mid = std::sqrt(6.0 / (2.0 * kHidden));   // 10<->10 layers
    for (int attempt = 0; attempt < 64; ++attempt) {
      n.theta.fill(0.0);
      block(net_layout::w5, 10, b_edge);
      block(net_layout::W4, 100, b_mid);
      block(net_layout::W3, 100, b_mid);
      block(net_layout::W2, 100, b_mid);
      block(net_layout::W1, 100, b_mid);
      block(net_layout::W0, 10, b_edge);
      bool admissible = true;
      for (int k = 0; k <= 2400 && admissible; ++k)
        admissible = std::fabs(n.forward(0.05 * k * time_scale)) < 1.0;
      if (admissible) return n;
    }
    throw numerical_error("init_xavier: no admissible draw after 64 attempts");
  }

  net_blocks unflatten() const {
    net_blocks b;
    auto cp = [&](auto& dst, int off) {
      std::memcpy(dst.data(), theta.data() + off, sizeof(double) * dst.size());
    };
    cp(b.w5, net_layout::w5);
    cp(b.W4, net_layout::W4);
    cp(b.W3, net_layout::W3);
    cp(b.W2, net_layout::W2);
    cp(b.W1, net_layout::W1);
    cp(b.W0, net_layout::W0);
    b.b5 = theta[net_layout::b5];
    cp(b.b4, net_layout::b4);
    cp(b.b3, net_layout::b3);
    cp(b.b2, net_layout::b2);
    cp(b.b1, net_layout::b1);
    cp(b.b0, net_layout::b0);
    return b;
  }

  static control_net flatten(const net_blocks& b, double time_scale) {
    control_net n;
    n.time_scale = time_scale;
    auto cp = [&](const auto& src, int off) {
      std::memcpy(n.theta.data() + off, src.data(), sizeof(double) * src.size());
    };
    cp(b.w5, net_layout::w5);
    cp(b.W4, net_layout::W4);
    cp(b.W3, net_layout::W3);
    cp(b.W2, net_layout::W2);
    cp(b.W1, net_layout::W1);
    cp(b.W0, net_layout::W0);
    n.theta[net_layout::b5] = b.b5;
    cp(b.b4, net_layout::b4);
    cp(b.b3, net_layout::b3);
    cp(b.b2, net_layout::b2);
    cp(b.b1, net_layout::b1);
    cp(b.b0, net_layout::b0);
    return n;
  }

  // u_theta(t). Raw output, no squashing.
  double forward(double t) const {
    workspace ws;
    return run_forward(t, ws);
  }

  // d u / d t via the chain rule through all layers.
  double du_dt(double t) const {
    workspace ws;
    run_forward(t, ws);
    return run_du(ws);
  }

  // d u / d theta (length 471), layout identical to theta.
  void grad_theta(double t, double* out) const {
    workspace ws;
    run_forward(t, ws);
    run_grad(ws, out);
  }

  // Batched evaluation on a time grid: u, du/dt and (optionally) per-node
  // gradient rows (grad[k*471 .. k*471+470] for node k). One pass per node;
  // this is the training hot path.
  struct batch {
    std::vector<double> u;
    std::vector<double> du;
    std::vector<double> grad;  // n x 471, row-major; empty unless requested
  };

  batch eval_grid(const std::vector<double>& times, bool need_grad) const {
    batch out;
    const std::size_t n = times.size();
    out.u.resize(n);
    out.du.resize(n);
    if (need_grad) out.grad.resize(n * kNetParams);
    workspace ws;
    for (std::size_t k = 0; k < n; ++k) {
      out.u[k] = run_forward(times[k], ws);
      out.du[k] = run_du(ws);
      if (need_grad) run_grad(ws, out.grad.data() + k * kNetParams);
    }
    return out;
  }

 private:
  struct workspace {
    double x;               // normalized input
    double z[4][kHidden];   // z1..z4
    double h5[kHidden];
  };

  double run_forward(double t, workspace& ws) const {
    const double* th = theta.data();
    ws.x = t / time_scale;
    for (int i = 0; i < kHidden; ++i)
      ws.z[0][i] = std::tanh(th[net_layout::W0 + i] * ws.x + th[net_layout::b0 + i]);
    constexpr int Ws[3] = {net_layout::W1, net_layout::W2, net_layout::W3};
    constexpr int bs[3] = {net_layout::b1, net_layout::b2, net_layout::b3};
    for (int l = 0; l < 3; ++l) {
      for (int i = 0; i < kHidden; ++i) {
        double a = th[bs[l] + i];
        const double* row = th + Ws[l] + kHidden * i;
        for (int j = 0; j < kHidden; ++j) a += row[j] * ws.z[l][j];
        ws.z[l + 1][i] = std::tanh(a);
      }
    }
    for (int i = 0; i < kHidden; ++i) {
      double a = th[net_layout::b4 + i];
      const double* row = th + net_layout::W4 + kHidden * i;
      for (int j = 0; j < kHidden; ++j) a += row[j] * ws.z[3][j];
      ws.h5[i] = std::tanh(a);
    }
    double u = th[net_layout::b5];
    for (int i = 0; i < kHidden; ++i) u += th[net_layout::w5 + i] * ws.h5[i];
    if (clamp_output) u = std::min(std::max(u, 0.0), 1.0 - 1e-6);
    return u;
  }

  double run_du(const workspace& ws) const {
    const double* th = theta.data();
    double dz[kHidden], dn[kHidden];
    for (int i = 0; i < kHidden; ++i)
      dz[i] = (1.0 - ws.z[0][i] * ws.z[0][i]) * th[net_layout::W0 + i] / time_scale;
    constexpr int Ws[3] = {net_layout::W1, net_layout::W2, net_layout::W3};
    for (int l = 0; l < 3; ++l) {
      for (int i = 0; i < kHidden; ++i) {
        double da = 0.0;
        const double* row = th + Ws[l] + kHidden * i;
        for (int j = 0; j < kHidden; ++j) da += row[j] * dz[j];
        dn[i] = (1.0 - ws.z[l + 1][i] * ws.z[l + 1][i]) * da;
      }
      std::memcpy(dz, dn, sizeof(dz));
    }
    double du = 0.0;
    for (int i = 0; i < kHidden; ++i) {
      double da = 0.0;
      const double* row = th + net_layout::W4 + kHidden * i;
      for (int j = 0; j < kHidden; ++j) da += row[j] * dz[j];
      du += th[net_layout::w5 + i] * (1.0 - ws.h5[i] * ws.h5[i]) * da;
    }
    return du;
  }

  // Reverse pass writing all 471 components of d u / d theta.
  void run_grad(const workspace& ws, double* g) const {
    const double* th = theta.data();
    double dcur[kHidden], dnxt[kHidden];

    g[net_layout::b5] = 1.0;
    for (int i = 0; i < kHidden; ++i) {
      g[net_layout::w5 + i] = ws.h5[i];
      dcur[i] = (1.0 - ws.h5[i] * ws.h5[i]) * th[net_layout::w5 + i];
    }
    for (int i = 0; i < kHidden; ++i) {
      g[net_layout::b4 + i] = dcur[i];
      double* row = g + net_layout::W4 + kHidden * i;
      for (int j = 0; j < kHidden; ++j) row[j] = dcur[i] * ws.z[3][j];
    }
    // Descend: delta through W4 emits the W3 block, through W3 the W2 block,
    // through W2 the W1 block.
    constexpr int Wsrc[3] = {net_layout::W4, net_layout::W3, net_layout::W2};
    constexpr int Wdst[3] = {net_layout::W3, net_layout::W2, net_layout::W1};
    constexpr int bdst[3] = {net_layout::b3, net_layout::b2, net_layout::b1};
    for (int l = 0; l < 3; ++l) {
      const double* feed = ws.z[2 - l];  // activation feeding the dst layer
      for (int j = 0; j < kHidden; ++j) {
        double acc = 0.0;
        for (int i = 0; i < kHidden; ++i)
          acc += th[Wsrc[l] + kHidden * i + j] * dcur[i];
        dnxt[j] = (1.0 - ws.z[3 - l][j] * ws.z[3 - l][j]) * acc;
      }
      std::memcpy(dcur, dnxt, sizeof(dcur));
      for (int i = 0; i < kHidden; ++i) {
        g[bdst[l] + i] = dcur[i];
        double* row = g + Wdst[l] + kHidden * i;
        for (int j = 0; j < kHidden; ++j) row[j] = dcur[i] * feed[j];
      }
    }
    // Delta through W1 emits the input layer blocks.
    for (int j = 0; j < kHidden; ++j) {
      double acc = 0.0;
      for (int i = 0; i < kHidden; ++i)
        acc += th[net_layout::W1 + kHidden * i + j] * dcur[i];
      dnxt[j] = (1.0 - ws.z[0][j] * ws.z[0][j]) * acc;
    }
    for (int j = 0; j < kHidden; ++j) {
      g[net_layout::b0 + j] = dnxt[j];
      g[net_layout::W0 + j] = dnxt[j] * ws.x;
    }
  }
};

}  // namespace epiopt
