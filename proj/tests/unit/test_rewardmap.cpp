#include "doctest.h"

#include <cmath>

#include "moslim/rewardmap.hpp"
#include "moslim/rng.hpp"

using namespace moslim;

namespace {

const std::vector<Dimension> kAllDims = {Dimension::Helpfulness, Dimension::Honesty,
                                         Dimension::Harmlessness};

// Statistics with the same (mean, std) in every cell, built through the
// serialized form so the moments can be pinned exactly.
HeadStatistics fixed_stats(const DataTypeScheme& scheme, double mean, double std) {
  HeadStatistics empty(scheme, kAllDims);
  auto j = empty.to_json("t", false);
  for (auto& [key, value] : j.items()) {
    if (key == "_header") continue;
    value = {{"mean", mean}, {"sqmean", mean * mean + std * std}, {"count", 100}};
  }
  return HeadStatistics::from_json(j);
}

HeadDistribution uniform_dist(const DataTypeScheme& scheme) {
  HeadDistribution dist;
  dist.dims = kAllDims;
  for (Dimension dim : kAllDims) {
    dist.probs.emplace_back(static_cast<std::size_t>(scheme.level_count(dim)),
                            1.0 / scheme.level_count(dim));
  }
  return dist;
}

}  // namespace

TEST_CASE("hand evaluation: single active dimension") {
  // (1/3) * (0.9 - 0.5) / 0.2 = 2/3 with k = 3 dimensions.
  const auto scheme = DataTypeScheme::from_id(4);
  const auto stats = fixed_stats(scheme, 0.5, 0.2);
  CHECK(stats.stddev(Dimension::Helpfulness, 4) == doctest::Approx(0.2).epsilon(1e-12));

  HeadDistribution dist = uniform_dist(scheme);
  dist.probs[0][4] = 0.9;  // p_target for helpfulness intensity 5
  PreferenceSpec spec;
  spec.set(Dimension::Helpfulness, 5);
  const auto reward = map_reward(dist, spec, stats);
  CHECK(reward.value == doctest::Approx((1.0 / 3.0) * (0.9 - 0.5) / 0.2).epsilon(1e-12));
  CHECK(reward.active_dims == 1);
}

TEST_CASE("centered probabilities map to zero") {
  const auto scheme = DataTypeScheme::from_id(2);
  const auto stats = fixed_stats(scheme, 0.5, 0.1);
  HeadDistribution dist = uniform_dist(scheme);
  PreferenceSpec spec;
  spec.set(Dimension::Helpfulness, 1);
  spec.set(Dimension::Harmlessness, 2);
  CHECK(map_reward(dist, spec, stats).value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("opposite standardized terms cancel") {
  const auto scheme = DataTypeScheme::from_id(2);
  const auto stats = fixed_stats(scheme, 0.5, 0.2);
  HeadDistribution dist = uniform_dist(scheme);
  dist.probs[0][0] = 0.7;  // +1 sigma
  dist.probs[1][0] = 0.3;  // -1 sigma
  PreferenceSpec spec;
  spec.set(Dimension::Helpfulness, 1);
  spec.set(Dimension::Honesty, 1);
  CHECK(map_reward(dist, spec, stats).value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("empty spec and uncalibrated stats raise") {
  const auto scheme = DataTypeScheme::from_id(2);
  HeadStatistics stats(scheme, kAllDims);
  HeadDistribution dist = uniform_dist(scheme);
  PreferenceSpec empty;
  try {
    map_reward(dist, empty, stats);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySpec);
  }
  PreferenceSpec spec;
  spec.set(Dimension::Honesty, 2);
  try {
    map_reward(dist, spec, stats);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotCalibrated);
  }
}

TEST_CASE("mask zeroing: inactive heads cannot move the reward") {
  const auto scheme = DataTypeScheme::from_id(4);
  const auto stats = fixed_stats(scheme, 0.4, 0.15);
  PreferenceSpec spec;
  spec.set(Dimension::Honesty, 3);
  Rng rng(6);
  HeadDistribution dist = uniform_dist(scheme);
  const double base = map_reward(dist, spec, stats).value;
  for (int iter = 0; iter < 100; ++iter) {
    // Scramble the masked heads arbitrarily (rows 0 and 2).
    for (std::size_t h : {std::size_t{0}, std::size_t{2}}) {
      double total = 0.0;
      for (auto& p : dist.probs[h]) total += (p = rng.uniform());
      for (auto& p : dist.probs[h]) p /= total;
    }
    CHECK(map_reward(dist, spec, stats).value == base);
  }
}

TEST_CASE("monotonicity in the target probability") {
  const auto scheme = DataTypeScheme::from_id(4);
  const auto stats = fixed_stats(scheme, 0.3, 0.1);
  PreferenceSpec spec;
  spec.set(Dimension::Helpfulness, 2);
  HeadDistribution dist = uniform_dist(scheme);
  double prev = -1e18;
  for (double p = 0.05; p <= 0.95; p += 0.05) {
    dist.probs[0][1] = p;
    const double value = map_reward(dist, spec, stats).value;
    CHECK(value > prev);
    prev = value;
  }
}

TEST_CASE("scale bound from probability range") {
  const auto scheme = DataTypeScheme::from_id(4);
  const auto stats = fixed_stats(scheme, 0.5, 0.25);
  Rng rng(12);
  for (int iter = 0; iter < 200; ++iter) {
    HeadDistribution dist = uniform_dist(scheme);
    for (auto& row : dist.probs) {
      double total = 0.0;
      for (auto& p : row) total += (p = rng.uniform() + 1e-3);
      for (auto& p : row) p /= total;
    }
    PreferenceSpec spec;
    double bound = 0.0;
    for (Dimension dim : kAllDimensions) {
      if (rng.uniform() < 0.6) {
        const int n = 1 + rng.uniform_int(0, scheme.level_count(dim) - 1);
        spec.set(dim, n);
        bound += 1.0 / stats.stddev(dim, n - 1);
      }
    }
    if (spec.empty()) continue;
    const double value = map_reward(dist, spec, stats).value;
    CHECK(std::abs(value) <= bound / kNumDimensions + 1e-12);
  }
}

TEST_CASE("normalize_by_active ablation switch") {
  const auto scheme = DataTypeScheme::from_id(4);
  const auto stats = fixed_stats(scheme, 0.2, 0.2);
  HeadDistribution dist = uniform_dist(scheme);
  PreferenceSpec spec;
  spec.set(Dimension::Helpfulness, 1);
  RewardMapConfig by_active;
  by_active.normalize_by_active = true;
  const double with_k = map_reward(dist, spec, stats).value;
  const double with_active = map_reward(dist, spec, stats, by_active).value;
  CHECK(with_active == doctest::Approx(3.0 * with_k).epsilon(1e-12));
}

TEST_CASE("batch_map is elementwise and order-preserving") {
  const auto scheme = DataTypeScheme::from_id(2);
  const auto stats = fixed_stats(scheme, 0.5, 0.14);

  CHECK(batch_map({}, {}, stats).empty());

  Rng rng(9);
  std::vector<HeadDistribution> dists;
  std::vector<PreferenceSpec> specs;
  for (int i = 0; i < 20; ++i) {
    auto dist = uniform_dist(scheme);
    for (auto& row : dist.probs) {
      double total = 0.0;
      for (auto& p : row) total += (p = rng.uniform() + 0.01);
      for (auto& p : row) p /= total;
    }
    PreferenceSpec spec;
    spec.set(kAllDimensions[static_cast<std::size_t>(rng.uniform_int(0, 2))],
             1 + rng.uniform_int(0, 1));
    dists.push_back(std::move(dist));
    specs.push_back(spec);
  }
  const auto rewards = batch_map(dists, specs, stats);
  REQUIRE(rewards.size() == 20);
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    CHECK(rewards[i].value == map_reward(dists[i], specs[i], stats).value);
  }
  // Single-element batch equals the scalar call.
  const auto single = batch_map({dists[3]}, {specs[3]}, stats);
  CHECK(single[0].value == rewards[3].value);
  // Permutation permutes outputs.
  std::vector<HeadDistribution> rev(dists.rbegin(), dists.rend());
  std::vector<PreferenceSpec> rev_specs(specs.rbegin(), specs.rend());
  const auto rev_rewards = batch_map(rev, rev_specs, stats);
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    CHECK(rev_rewards[rewards.size() - 1 - i].value == rewards[i].value);
  }
  // Errors carry the offending index.
  std::vector<PreferenceSpec> bad_specs = specs;
  bad_specs[7] = PreferenceSpec{};
  try {
    batch_map(dists, bad_specs, stats);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySpec);
    CHECK(std::string(e.what()).find("index 7") != std::string::npos);
  }
}
