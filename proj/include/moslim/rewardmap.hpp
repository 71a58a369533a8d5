#pragma once

#include <vector>

#include "moslim/rewardmodel.hpp"

namespace moslim {

struct MappedReward {
  double value = 0.0;
  int active_dims = 0;
};

struct RewardMapConfig {
  /// Divide by the number of prompted dimensions instead of the total
  /// dimension count. Ablation switch; default keeps the 1/k normalization.
  bool normalize_by_active = false;
};

/// Scalarizes multi-head classification output against a preference spec:
/// the probability each prompted head assigns to its prompted intensity
/// class is standardized by that (head, class)'s running statistics, masked
/// dimensions contribute nothing, and the sum is divided by the total
/// dimension count k.
///
/// Errors: EmptySpec when no dimension is prompted (the mapping is undefined
/// with all masks zero); NotCalibrated when statistics are missing.
MappedReward map_reward(const HeadDistribution& dist, const PreferenceSpec& spec,
                        const HeadStatistics& stats, const RewardMapConfig& cfg = {});

/// Elementwise map_reward; errors are rethrown with the offending index.
std::vector<MappedReward> batch_map(const std::vector<HeadDistribution>& dists,
                                    const std::vector<PreferenceSpec>& specs,
                                    const HeadStatistics& stats, const RewardMapConfig& cfg = {});

}  // namespace moslim
