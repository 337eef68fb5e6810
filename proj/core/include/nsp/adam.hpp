#pragma once

#include "nsp/errors.hpp"

#include <cmath>
#include <string>

namespace nsp {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment estimates shaped like the parameter struct. `Params` must provide
//   template <class F, class... Ps> static void zip(F&& f, Ps&... ps)
// which calls f(name, tensor_of_each_p...) for every tensor in the same order.
template <typename Params>
struct AdamState {
  Params m;
  Params v;
  long step = 0;

  static AdamState zeros_like(const Params& p) {
    AdamState s{p, p, 0};
    Params::zip([](const char*, auto& a, auto& b) {
      a.setZero();
      b.setZero();
    }, s.m, s.v);
    return s;
  }
};

// Throws NonFinite naming the first tensor with a NaN/Inf gradient.
template <typename Params>
void check_finite_gradients(const Params& grads) {
  Params::zip([](const char* name, const auto& g) {
    if (!g.allFinite()) {
      fail(ErrorKind::NonFinite, std::string("non-finite gradient in tensor '") + name + "'");
    }
  }, grads);
}

// Bias-corrected Adam update, in place.
template <typename Params>
void adam_step(AdamState<Params>& state, Params& params, const Params& grads,
               const AdamConfig& cfg) {
  check_finite_gradients(grads);
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  Params::zip(
      [&](const char*, auto& p, const auto& g, auto& m, auto& v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        p.array() -= cfg.learning_rate * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + cfg.epsilon);
      },
      params, grads, state.m, state.v);
}

}  // namespace nsp
