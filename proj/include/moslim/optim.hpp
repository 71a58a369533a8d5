#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "moslim/optimizer.hpp"
#include "moslim/policy.hpp"
#include "moslim/rewardmap.hpp"
#include "moslim/rewardmodel.hpp"

namespace moslim {

enum class Algo { Ppo, Rloo, Odpo, Morlhf };

const char* algo_name(Algo algo);
Algo algo_from_name(std::string_view name);

struct AlgoConfig {
  Algo algo = Algo::Ppo;
  double lr = 1e-2;
  double kl_coef = 5e-2;
  int batch_size = 64;  // prompts per step (groups per step for rloo)
  int epochs = 1;       // optimization passes over each collected batch
  double clip_eps = 0.2;
  int rloo_k = 4;
  double dpo_beta = 0.1;
  std::vector<double> weights;  // morlhf scalarization weights

  void validate() const;

  /// Desk-scale defaults per algorithm (batch 64 for ppo/morlhf, 32 for
  /// rloo/odpo).
  static AlgoConfig defaults_for(Algo algo);
  /// Full-scale preset: learning rates 5e-7 (8e-7 for rloo), same batch
  /// sizes, one epoch.
  static AlgoConfig paper_preset(Algo algo);
};

/// Trajectories with their mapped rewards and prompt specs.
struct RolloutBatch {
  std::vector<Trajectory> trajectories;
  std::vector<double> rewards;
  std::vector<PreferenceSpec> specs;

  void validate() const;
};

/// rloo_k trajectories for one tagged prompt.
struct RolloutGroup {
  std::vector<Trajectory> trajectories;
  std::vector<double> rewards;
};

/// One ranked response pair for Online-DPO.
struct PreferencePair {
  TaggedPrompt prompt;
  std::vector<int> winner;
  std::vector<int> loser;
};

struct StepDiagnostics {
  double mean_reward = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
  double loss = 0.0;
  int pairs = 0;
};

/// Penalized, batch-standardized advantages:
/// (r - kl_coef * kl - mean) / (std + 1e-8).
std::vector<double> ppo_advantages(const RolloutBatch& batch, const AlgoConfig& cfg);

struct PpoSurrogate {
  double value = 0.0;
  double clip_fraction = 0.0;
};

/// Clipped-ratio surrogate (to be maximized) and optionally its gradient.
/// Ratios compare the current policy against the batch's recorded sampling
/// logprobs.
PpoSurrogate ppo_surrogate(const PolicyModel& policy, const RolloutBatch& batch,
                           std::span<const double> advantages, const AlgoConfig& cfg,
                           const Vocabulary& vocab, std::vector<double>* grad = nullptr);

/// One clipped policy-gradient ascent update on the batch.
StepDiagnostics ppo_step(PolicyModel& policy, const PolicyModel& ref, const RolloutBatch& batch,
                         const AlgoConfig& cfg, const Vocabulary& vocab, AdamW& opt);

/// Leave-one-out advantages: A_j = r_j - mean of the other rewards. The
/// group sum is exactly zero (the last element absorbs rounding residue; an
/// all-equal group short-circuits to zeros).
std::vector<double> rloo_advantages(std::span<const double> rewards);

/// REINFORCE with the leave-one-out baseline over KL-penalized rewards.
StepDiagnostics rloo_step(PolicyModel& policy, std::span<const RolloutGroup> groups,
                          const AlgoConfig& cfg, const Vocabulary& vocab, AdamW& opt);

/// Mean sigmoid preference loss over implicit-reward margins; exposed
/// separately so gradients can be checked against finite differences.
double odpo_loss(const PolicyModel& policy, const PolicyModel& ref,
                 std::span<const PreferencePair> pairs, const AlgoConfig& cfg,
                 const Vocabulary& vocab, std::vector<double>* grad = nullptr);

StepDiagnostics odpo_step(PolicyModel& policy, const PolicyModel& ref,
                          std::span<const PreferencePair> pairs, const AlgoConfig& cfg,
                          const Vocabulary& vocab, AdamW& opt);

/// Weighted sum of per-dimension scalar rewards (each scalar model is a
/// single-head classifier read out as normalized expected intensity).
double morlhf_reward(std::span<const MultiHeadRewardModel* const> scalar_rms,
                     std::span<const double> weights, std::span<const int> q,
                     std::span<const int> a, const Vocabulary& vocab);

/// Where scalar rewards come from during a training run: either the
/// multi-head model + reward mapping, or the per-dimension baseline models
/// (combined with AlgoConfig::weights).
struct RewardSource {
  const MultiHeadRewardModel* rm = nullptr;
  const HeadStatistics* stats = nullptr;
  std::vector<const MultiHeadRewardModel*> scalar_rms;
};

struct TrainPolicyConfig {
  AlgoConfig algo;
  int steps = 200;
  int log_interval = 10;
  int max_len = kDefaultResponseLength;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string metrics_path;     // empty: keep metrics in memory only
  std::string checkpoint_path;  // empty: no checkpoint file
  bool with_timestamp = true;
  std::string config_hash = "0";
};

struct MetricsRow {
  int step = 0;
  std::string algo;
  double mean_reward = 0.0;
  double mean_kl = 0.0;
  double oracle_helpfulness = 0.0;
  double oracle_honesty = 0.0;
  double oracle_harmless = 0.0;
};

struct RunSummary {
  PolicyModel policy;
  std::vector<MetricsRow> metrics;
  std::uint64_t rm_invocations = 0;
  std::uint64_t rm_tag_violations = 0;
  double step0_mean_reward = 0.0;
  double final_mean_reward = 0.0;
};

/// Full optimization loop: cycle tagged prompts, roll out, strip tags before
/// any reward-model scoring, map rewards, apply the selected step. Metrics
/// are appended every log_interval steps; the run is deterministic per seed
/// and independent of the worker count.
RunSummary run_training(const TrainPolicyConfig& cfg, const RlDataset& prompts,
                        const RewardSource& source, PolicyModel policy, const Vocabulary& vocab,
                        const PolicyModel* ref = nullptr);

}  // namespace moslim
