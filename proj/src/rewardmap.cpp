#include "moslim/rewardmap.hpp"

#include <cmath>

namespace moslim {

MappedReward map_reward(const HeadDistribution& dist, const PreferenceSpec& spec,
                        const HeadStatistics& stats, const RewardMapConfig& cfg) {
  if (spec.empty()) raise(ErrorCode::EmptySpec, "no active preference");
  double sum = 0.0;
  int active = 0;
  for (auto [dim, target] : spec.targets()) {
    const auto* probs = dist.find(dim);
    if (!probs) raise(ErrorCode::SchemeMismatch, std::string("no head for ") + tag_name(dim));
    if (target < 1 || target > static_cast<int>(probs->size())) {
      raise(ErrorCode::IntensityOutOfRange,
            std::string(tag_name(dim)) + " intensity " + std::to_string(target));
    }
    const int cls = target - 1;
    const double p_target = (*probs)[static_cast<std::size_t>(cls)];
    sum += (p_target - stats.mean(dim, cls)) / stats.stddev(dim, cls);
    ++active;
  }
  MappedReward out;
  out.active_dims = active;
  out.value = sum / (cfg.normalize_by_active ? active : kNumDimensions);
  if (!std::isfinite(out.value)) raise(ErrorCode::InvalidArgument, "non-finite mapped reward");
  return out;
}

std::vector<MappedReward> batch_map(const std::vector<HeadDistribution>& dists,
                                    const std::vector<PreferenceSpec>& specs,
                                    const HeadStatistics& stats, const RewardMapConfig& cfg) {
  if (dists.size() != specs.size()) {
    raise(ErrorCode::ShapeMismatch, "distribution and spec counts differ");
  }
  std::vector<MappedReward> out;
  out.reserve(dists.size());
  for (std::size_t i = 0; i < dists.size(); ++i) {
    try {
      out.push_back(map_reward(dists[i], specs[i], stats, cfg));
    } catch (const Error& e) {
      throw Error(e.code(), "batch index " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace moslim
