#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "moslim/error.hpp"

namespace moslim {

// splitmix64; used to decorrelate derived seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent stream. Streams are identified by index so the
/// same work item produces the same values regardless of how items are
/// sharded across workers.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(splitmix64(base ^ stream) + stream);
}

/// Deterministic generator (xoshiro256**). Self-contained so sequences are
/// identical across platforms and standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x = splitmix64(x);
      s = x;
    }
  }

  std::uint64_t next() {
    auto rotl = [](std::uint64_t v, int k) {
      return (v << k) | (v >> (64 - k));
    };
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    if (hi < lo) raise(ErrorCode::InvalidArgument, "uniform_int: hi < lo");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return lo + static_cast<int>(x % span);
  }

  /// Index drawn from an unnormalized weight vector.
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) raise(ErrorCode::InvalidArgument, "categorical: nonpositive total weight");
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<int>(i) - 1));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t state_[4];
};

}  // namespace moslim
