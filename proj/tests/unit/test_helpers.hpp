#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace moslim::testing {

/// Central finite differences of a scalar function over a parameter vector.
inline std::vector<double> finite_difference(const std::function<double()>& f,
                                             std::span<double> params, double h = 1e-5) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double hi = f();
    params[i] = saved - h;
    const double lo = f();
    params[i] = saved;
    grad[i] = (hi - lo) / (2.0 * h);
  }
  return grad;
}

/// ||a - b|| / max(||a||, ||b||, eps).
inline double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
  return std::sqrt(diff) / denom;
}

}  // namespace moslim::testing
