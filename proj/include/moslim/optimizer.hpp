#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace moslim {

/// Adaptive moment estimation with decoupled weight decay.
struct AdamW {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  std::vector<double> m, v;
  std::int64_t t = 0;

  void reset(std::size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    t = 0;
  }

  /// One update. `lr_scale` applies schedule factors (warmup).
  void step(std::span<double> params, std::span<const double> grad, double lr_scale = 1.0) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    const double rate = lr * lr_scale;
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      params[i] -= rate * (mhat / (std::sqrt(vhat) + eps) + weight_decay * params[i]);
    }
  }
};

inline double warmup_scale(std::int64_t step, int warmup_steps) {
  if (warmup_steps <= 0) return 1.0;
  return step >= warmup_steps ? 1.0 : static_cast<double>(step + 1) / warmup_steps;
}

}  // namespace moslim
