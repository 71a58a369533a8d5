#include "moslim/optim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "moslim/rng.hpp"
#include "moslim/util.hpp"

namespace moslim {

using nlohmann::json;

const char* algo_name(Algo algo) {
  switch (algo) {
    case Algo::Ppo: return "ppo";
    case Algo::Rloo: return "rloo";
    case Algo::Odpo: return "odpo";
    case Algo::Morlhf: return "morlhf";
  }
  return "?";
}

Algo algo_from_name(std::string_view name) {
  if (name == "ppo") return Algo::Ppo;
  if (name == "rloo") return Algo::Rloo;
  if (name == "odpo") return Algo::Odpo;
  if (name == "morlhf") return Algo::Morlhf;
  raise(ErrorCode::ConfigInvalid, "unknown algorithm '" + std::string(name) + "'");
}

void AlgoConfig::validate() const {
  if (kl_coef < 0.0) raise(ErrorCode::ConfigInvalid, "kl_coef must be >= 0");
  if (clip_eps <= 0.0) raise(ErrorCode::ConfigInvalid, "clip_eps must be > 0");
  if (rloo_k < 2) raise(ErrorCode::ConfigInvalid, "rloo_k must be >= 2");
  if (batch_size < 1) raise(ErrorCode::ConfigInvalid, "batch_size must be >= 1");
  if (epochs < 1) raise(ErrorCode::ConfigInvalid, "epochs must be >= 1");
  if (dpo_beta <= 0.0) raise(ErrorCode::ConfigInvalid, "dpo_beta must be > 0");
  if (lr <= 0.0) raise(ErrorCode::ConfigInvalid, "lr must be > 0");
  if (algo == Algo::Morlhf) {
    if (weights.empty()) raise(ErrorCode::ConfigInvalid, "morlhf needs scalarization weights");
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) raise(ErrorCode::BadWeights, "weights must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) raise(ErrorCode::BadWeights, "weights must sum to 1");
  }
}

AlgoConfig AlgoConfig::defaults_for(Algo algo) {
  AlgoConfig cfg;
  cfg.algo = algo;
  cfg.batch_size = (algo == Algo::Rloo || algo == Algo::Odpo) ? 32 : 64;
  return cfg;
}

AlgoConfig AlgoConfig::paper_preset(Algo algo) {
  AlgoConfig cfg = defaults_for(algo);
  cfg.lr = algo == Algo::Rloo ? 8e-7 : 5e-7;
  return cfg;
}

void RolloutBatch::validate() const {
  if (trajectories.empty()) raise(ErrorCode::EmptyBatch, "empty rollout batch");
  if (trajectories.size() != rewards.size() || trajectories.size() != specs.size()) {
    raise(ErrorCode::ShapeMismatch, "rollout batch field lengths differ");
  }
  for (double r : rewards) {
    if (!std::isfinite(r)) raise(ErrorCode::InvalidArgument, "non-finite reward in batch");
  }
}

// ---------------------------------------------------------------------------
// PPO

std::vector<double> ppo_advantages(const RolloutBatch& batch, const AlgoConfig& cfg) {
  batch.validate();
  const std::size_t n = batch.trajectories.size();
  std::vector<double> penalized(n);
  for (std::size_t j = 0; j < n; ++j) {
    penalized[j] = batch.rewards[j] - cfg.kl_coef * batch.trajectories[j].kl_sum();
  }
  double mean = 0.0;
  for (double r : penalized) mean += r;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double r : penalized) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  std::vector<double> adv(n);
  for (std::size_t j = 0; j < n; ++j) adv[j] = (penalized[j] - mean) / (sd + 1e-8);
  return adv;
}

PpoSurrogate ppo_surrogate(const PolicyModel& policy, const RolloutBatch& batch,
                           std::span<const double> advantages, const AlgoConfig& cfg,
                           const Vocabulary& vocab, std::vector<double>* grad) {
  batch.validate();
  if (advantages.size() != batch.trajectories.size()) {
    raise(ErrorCode::ShapeMismatch, "advantage count differs from batch size");
  }
  if (grad) grad->assign(policy.params().size(), 0.0);
  const auto n = static_cast<double>(batch.trajectories.size());
  PpoSurrogate out;
  int clipped = 0;
  for (std::size_t j = 0; j < batch.trajectories.size(); ++j) {
    const Trajectory& traj = batch.trajectories[j];
    const auto lp = policy.logprob(traj.tagged_prompt, vocab, traj.response);
    double lp_sum = 0.0;
    for (double v : lp) lp_sum += v;
    const double ratio = std::exp(lp_sum - traj.logprob_sum());
    const double a = advantages[j];
    const double unclipped = ratio * a;
    const double clamped = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * a;
    const bool clip_binds = clamped < unclipped;
    out.value += std::min(unclipped, clamped) / n;
    if (clip_binds) ++clipped;
    if (grad && !clip_binds) {
      // d/dtheta [ratio * A] = ratio * A * dlogpi
      policy.accumulate_logprob_grad(traj.tagged_prompt, vocab, traj.response, ratio * a / n, *grad);
    }
  }
  out.clip_fraction = clipped / n;
  return out;
}

namespace {

double mean_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

}  // namespace

StepDiagnostics ppo_step(PolicyModel& policy, const PolicyModel& ref, const RolloutBatch& batch,
                         const AlgoConfig& cfg, const Vocabulary& vocab, AdamW& opt) {
  (void)ref;  // the KL term uses the reference logprobs recorded at sampling time
  cfg.validate();
  const auto advantages = ppo_advantages(batch, cfg);
  StepDiagnostics diag;
  diag.mean_reward = mean_of(batch.rewards);
  std::vector<double> kls(batch.trajectories.size());
  for (std::size_t j = 0; j < kls.size(); ++j) kls[j] = batch.trajectories[j].kl_sum();
  diag.mean_kl = mean_of(kls);

  std::vector<double> grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto surrogate = ppo_surrogate(policy, batch, advantages, cfg, vocab, &grad);
    diag.clip_fraction = surrogate.clip_fraction;
    diag.loss = -surrogate.value;
    for (auto& gval : grad) gval = -gval;  // maximize surrogate
    opt.step(policy.mutable_params(), grad);
  }
  return diag;
}

// ---------------------------------------------------------------------------
// RLOO

std::vector<double> rloo_advantages(std::span<const double> rewards) {
  const std::size_t k = rewards.size();
  if (k < 2) raise(ErrorCode::GroupTooSmall, "leave-one-out needs k >= 2");
  bool all_equal = true;
  for (double r : rewards) all_equal = all_equal && r == rewards[0];
  if (all_equal) return std::vector<double>(k, 0.0);

  double total = 0.0;
  for (double r : rewards) total += r;
  std::vector<double> adv(k);
  for (std::size_t j = 0; j < k; ++j) {
    adv[j] = rewards[j] - (total - rewards[j]) / static_cast<double>(k - 1);
  }
  // The algebraic group sum is zero; the last element absorbs the floating-
  // point residue so the invariant holds exactly.
  double prefix = 0.0;
  for (std::size_t j = 0; j + 1 < k; ++j) prefix += adv[j];
  adv[k - 1] = -prefix;
  return adv;
}

StepDiagnostics rloo_step(PolicyModel& policy, std::span<const RolloutGroup> groups,
                          const AlgoConfig& cfg, const Vocabulary& vocab, AdamW& opt) {
  cfg.validate();
  if (groups.empty()) raise(ErrorCode::EmptyBatch, "rloo needs at least one group");
  StepDiagnostics diag;
  std::vector<double> grad(policy.params().size(), 0.0);
  double reward_total = 0.0, kl_total = 0.0;
  std::size_t count = 0;
  for (const auto& group : groups) {
    if (group.trajectories.size() < 2) raise(ErrorCode::GroupTooSmall, "group smaller than 2");
    if (group.trajectories.size() != group.rewards.size()) {
      raise(ErrorCode::ShapeMismatch, "group reward count differs");
    }
    std::vector<double> penalized(group.rewards.size());
    for (std::size_t j = 0; j < penalized.size(); ++j) {
      const double kl = group.trajectories[j].kl_sum();
      penalized[j] = group.rewards[j] - cfg.kl_coef * kl;
      reward_total += group.rewards[j];
      kl_total += kl;
      ++count;
    }
    const auto adv = rloo_advantages(penalized);
    const double scale = 1.0 / (static_cast<double>(groups.size()) * penalized.size());
    for (std::size_t j = 0; j < adv.size(); ++j) {
      if (adv[j] == 0.0) continue;
      const auto& traj = group.trajectories[j];
      // maximize sum_j A_j log pi(y_j); AdamW minimizes, hence the sign.
      policy.accumulate_logprob_grad(traj.tagged_prompt, vocab, traj.response,
                                     -adv[j] * scale, grad);
    }
  }
  diag.mean_reward = reward_total / static_cast<double>(count);
  diag.mean_kl = kl_total / static_cast<double>(count);
  opt.step(policy.mutable_params(), grad);
  return diag;
}

// ---------------------------------------------------------------------------
// Online-DPO

namespace {

double softplus(double x) {
  if (x > 30.0) return x;
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double ex = std::exp(x);
  return ex / (1.0 + ex);
}

}  // namespace

double odpo_loss(const PolicyModel& policy, const PolicyModel& ref,
                 std::span<const PreferencePair> pairs, const AlgoConfig& cfg,
                 const Vocabulary& vocab, std::vector<double>* grad) {
  if (pairs.empty()) raise(ErrorCode::EmptyBatch, "odpo needs at least one pair");
  if (grad) grad->assign(policy.params().size(), 0.0);
  double total = 0.0;
  const double scale = 1.0 / static_cast<double>(pairs.size());
  for (const auto& pair : pairs) {
    auto lp_sum = [&](const PolicyModel& model, std::span<const int> response) {
      const auto lp = model.logprob(pair.prompt, vocab, response);
      double s = 0.0;
      for (double v : lp) s += v;
      return s;
    };
    const double margin = cfg.dpo_beta * ((lp_sum(policy, pair.winner) - lp_sum(ref, pair.winner)) -
                                          (lp_sum(policy, pair.loser) - lp_sum(ref, pair.loser)));
    total += softplus(-margin) * scale;  // -log sigmoid(margin)
    if (grad) {
      const double coeff = -sigmoid(-margin) * cfg.dpo_beta * scale;
      policy.accumulate_logprob_grad(pair.prompt, vocab, pair.winner, coeff, *grad);
      policy.accumulate_logprob_grad(pair.prompt, vocab, pair.loser, -coeff, *grad);
    }
  }
  return total;
}

StepDiagnostics odpo_step(PolicyModel& policy, const PolicyModel& ref,
                          std::span<const PreferencePair> pairs, const AlgoConfig& cfg,
                          const Vocabulary& vocab, AdamW& opt) {
  cfg.validate();
  StepDiagnostics diag;
  std::vector<double> grad;
  diag.loss = odpo_loss(policy, ref, pairs, cfg, vocab, &grad);
  diag.pairs = static_cast<int>(pairs.size());
  opt.step(policy.mutable_params(), grad);
  return diag;
}

// ---------------------------------------------------------------------------
// Weighted-sum baseline

double morlhf_reward(std::span<const MultiHeadRewardModel* const> scalar_rms,
                     std::span<const double> weights, std::span<const int> q,
                     std::span<const int> a, const Vocabulary& vocab) {
  if (scalar_rms.size() != weights.size()) {
    raise(ErrorCode::WeightMismatch, "weight count differs from reward-model count");
  }
  if (scalar_rms.empty()) raise(ErrorCode::WeightMismatch, "no reward models given");
  double total_w = 0.0;
  for (double w : weights) {
    if (w < 0.0) raise(ErrorCode::BadWeights, "weights must be nonnegative");
    total_w += w;
  }
  if (std::abs(total_w - 1.0) > 1e-9) raise(ErrorCode::BadWeights, "weights must sum to 1");
  double reward = 0.0;
  for (std::size_t i = 0; i < scalar_rms.size(); ++i) {
    const auto* model = scalar_rms[i];
    if (model->dims().size() != 1) {
      raise(ErrorCode::SchemeMismatch, "baseline reward models must be single-head");
    }
    reward += weights[i] * scalar_reward(*model, model->dims()[0], q, a, vocab);
  }
  return reward;
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

/// All reward-model scoring passes through here; the boundary strips tags
/// and counts invocations that still carry them.
struct ScoreGate {
  const Vocabulary& vocab;
  std::atomic<std::uint64_t> invocations{0};
  std::atomic<std::uint64_t> violations{0};

  std::vector<int> admit(const TaggedPrompt& tp) {
    const std::string aligned = strip_tags(serialize_prefix(tp));
    invocations.fetch_add(1);
    if (strip_tags(aligned) != aligned || aligned.find('<') != std::string::npos) {
      violations.fetch_add(1);
    }
    return parse_body_tokens(aligned, vocab);
  }
};

struct ScoredRollout {
  Trajectory traj;
  double reward = 0.0;
  OracleScore oracle;
};

class TrainingSession {
 public:
  TrainingSession(const TrainPolicyConfig& cfg, const RlDataset& prompts,
                  const RewardSource& source, PolicyModel policy, const Vocabulary& vocab,
                  const PolicyModel* ref)
      : cfg_(cfg),
        prompts_(prompts),
        source_(source),
        vocab_(vocab),
        policy_(std::move(policy)),
        ref_(ref ? *ref : policy_),
        gate_{vocab} {
    cfg_.algo.validate();
    if (cfg_.steps < 1) raise(ErrorCode::ConfigInvalid, "steps must be >= 1");
    if (cfg_.log_interval < 1) raise(ErrorCode::ConfigInvalid, "log_interval must be >= 1");
    if (prompts_.samples.empty()) raise(ErrorCode::EmptyDataset, "no prompts");
    const bool moslim_route = cfg_.algo.algo != Algo::Morlhf;
    if (moslim_route) {
      if (!source_.rm || !source_.stats) {
        raise(ErrorCode::NotCalibrated, "multi-head reward model and statistics required");
      }
    } else {
      if (source_.scalar_rms.empty()) {
        raise(ErrorCode::ConfigInvalid, "morlhf needs per-dimension reward models");
      }
    }
    opt_.lr = cfg_.algo.lr;
    opt_.weight_decay = 0.0;
    opt_.reset(policy_.params().size());
    order_.resize(prompts_.samples.size());
    std::iota(order_.begin(), order_.end(), 0);
    Rng rng(derive_seed(cfg_.seed, 0x0fdeULL));
    rng.shuffle(order_);
  }

  RunSummary run() {
    std::ofstream metrics_file;
    if (!cfg_.metrics_path.empty()) {
      metrics_file.open(cfg_.metrics_path, std::ios::binary | std::ios::trunc);
      if (!metrics_file) raise(ErrorCode::IoFailure, "cannot write " + cfg_.metrics_path);
    }
    RunSummary summary;
    for (int step = 0; step < cfg_.steps; ++step) {
      const StepDiagnostics diag = run_step(step);
      if (step == 0) summary.step0_mean_reward = diag.mean_reward;
      summary.final_mean_reward = diag.mean_reward;
      if (step % cfg_.log_interval == 0) {
        MetricsRow row;
        row.step = step;
        row.algo = algo_name(cfg_.algo.algo);
        row.mean_reward = diag.mean_reward;
        row.mean_kl = diag.mean_kl;
        row.oracle_helpfulness = oracle_means_[0];
        row.oracle_honesty = oracle_means_[1];
        row.oracle_harmless = oracle_means_[2];
        summary.metrics.push_back(row);
        if (metrics_file.is_open()) {
          // config_hash rides on every row: the metrics file has no header
          // line (row count must equal steps / log_interval).
          json line = {{"step", row.step},
                       {"algo", row.algo},
                       {"mean_reward", row.mean_reward},
                       {"mean_kl", row.mean_kl},
                       {"oracle",
                        {{"helpfulness", row.oracle_helpfulness},
                         {"honesty", row.oracle_honesty},
                         {"harmless", row.oracle_harmless}}},
                       {"config_hash", cfg_.config_hash}};
          metrics_file << line.dump() << '\n';
        }
      }
    }
    if (metrics_file.is_open()) metrics_file.close();
    if (!cfg_.checkpoint_path.empty()) {
      Checkpoint ckpt = policy_.to_checkpoint(vocab_.hash());
      stamp_header(ckpt.header, cfg_.config_hash, cfg_.with_timestamp);
      save_checkpoint(ckpt, cfg_.checkpoint_path);
    }
    summary.policy = std::move(policy_);
    summary.rm_invocations = gate_.invocations.load();
    summary.rm_tag_violations = gate_.violations.load();
    return summary;
  }

 private:
  const TaggedPrompt& prompt_at(int step, int slot) const {
    const std::size_t idx = (static_cast<std::size_t>(step) * cfg_.algo.batch_size +
                             static_cast<std::size_t>(slot)) %
                            order_.size();
    return prompts_.samples[order_[idx]].tagged;
  }

  TaggedPrompt strip_for_baseline(const TaggedPrompt& tp) const {
    // The weighted-sum baseline trains without preference prefixes.
    TaggedPrompt bare;
    bare.body = tp.body;
    return bare;
  }

  ScoredRollout collect_one(const TaggedPrompt& tp, std::uint64_t seed) {
    ScoredRollout out;
    out.traj = policy_.sample(tp, vocab_, cfg_.max_len, cfg_.temperature, seed);
    const auto ref_lp = ref_.logprob(tp, vocab_, out.traj.response);
    out.traj.ref_logprobs = ref_lp;
    const auto q = gate_.admit(tp);
    if (cfg_.algo.algo == Algo::Morlhf) {
      out.reward = morlhf_reward(source_.scalar_rms, cfg_.algo.weights, q, out.traj.response, vocab_);
    } else {
      const auto dist = source_.rm->forward(q, out.traj.response, vocab_);
      out.reward = map_reward(dist, tp.spec, *source_.stats).value;
    }
    out.oracle = oracle_score(out.traj.response, vocab_);
    return out;
  }

  void record_oracle(std::span<const ScoredRollout> rollouts) {
    double help = 0.0, honest = 0.0, harmless = 0.0;
    for (const auto& r : rollouts) {
      help += r.oracle.helpfulness;
      honest += r.oracle.honesty;
      harmless += r.oracle.harmlessness;
    }
    const auto n = static_cast<double>(rollouts.size());
    oracle_means_ = {help / n, honest / n, harmless / n};
  }

  StepDiagnostics run_step(int step) {
    const int b = cfg_.algo.batch_size;
    const Algo algo = cfg_.algo.algo;
    const std::uint64_t step_seed = derive_seed(cfg_.seed, 0xabcd0000ULL + static_cast<std::uint64_t>(step));

    if (algo == Algo::Rloo) {
      const int k = cfg_.algo.rloo_k;
      std::vector<RolloutGroup> groups(static_cast<std::size_t>(b));
      std::vector<ScoredRollout> flat(static_cast<std::size_t>(b) * k);
      parallel_for(flat.size(), cfg_.workers, [&](std::size_t slot) {
        const int g = static_cast<int>(slot) / k;
        const TaggedPrompt& tp = prompt_at(step, g);
        flat[slot] = collect_one(tp, derive_seed(step_seed, slot));
      });
      for (int g = 0; g < b; ++g) {
        auto& group = groups[static_cast<std::size_t>(g)];
        for (int j = 0; j < k; ++j) {
          auto& r = flat[static_cast<std::size_t>(g) * k + static_cast<std::size_t>(j)];
          group.trajectories.push_back(std::move(r.traj));
          group.rewards.push_back(r.reward);
        }
      }
      record_oracle(flat);
      return rloo_step(policy_, groups, cfg_.algo, vocab_, opt_);
    }

    if (algo == Algo::Odpo) {
      std::vector<ScoredRollout> flat(static_cast<std::size_t>(b) * 2);
      parallel_for(flat.size(), cfg_.workers, [&](std::size_t slot) {
        const int p = static_cast<int>(slot) / 2;
        const TaggedPrompt& tp = prompt_at(step, p);
        flat[slot] = collect_one(tp, derive_seed(step_seed, slot));
      });
      std::vector<PreferencePair> pairs;
      double reward_total = 0.0, kl_total = 0.0;
      for (int p = 0; p < b; ++p) {
        auto& first = flat[static_cast<std::size_t>(p) * 2];
        auto& second = flat[static_cast<std::size_t>(p) * 2 + 1];
        reward_total += first.reward + second.reward;
        kl_total += first.traj.kl_sum() + second.traj.kl_sum();
        if (first.reward == second.reward) continue;  // ties dropped
        PreferencePair pair;
        pair.prompt = first.traj.tagged_prompt;
        if (first.reward > second.reward) {
          pair.winner = first.traj.response;
          pair.loser = second.traj.response;
        } else {
          pair.winner = second.traj.response;
          pair.loser = first.traj.response;
        }
        pairs.push_back(std::move(pair));
      }
      record_oracle(flat);
      StepDiagnostics diag;
      if (!pairs.empty()) diag = odpo_step(policy_, ref_, pairs, cfg_.algo, vocab_, opt_);
      diag.mean_reward = reward_total / static_cast<double>(flat.size());
      diag.mean_kl = kl_total / static_cast<double>(flat.size());
      diag.pairs = static_cast<int>(pairs.size());
      return diag;
    }

    // ppo / morlhf share the clipped-ratio update.
    std::vector<ScoredRollout> flat(static_cast<std::size_t>(b));
    parallel_for(flat.size(), cfg_.workers, [&](std::size_t slot) {
      TaggedPrompt tp = prompt_at(step, static_cast<int>(slot));
      if (algo == Algo::Morlhf) tp = strip_for_baseline(tp);
      flat[slot] = collect_one(tp, derive_seed(step_seed, slot));
    });
    RolloutBatch batch;
    for (auto& r : flat) {
      batch.specs.push_back(r.traj.tagged_prompt.spec);
      batch.rewards.push_back(r.reward);
      batch.trajectories.push_back(std::move(r.traj));
    }
    record_oracle(flat);
    return ppo_step(policy_, ref_, batch, cfg_.algo, vocab_, opt_);
  }

  TrainPolicyConfig cfg_;
  const RlDataset& prompts_;
  const RewardSource& source_;
  const Vocabulary& vocab_;
  PolicyModel policy_;
  PolicyModel ref_;
  ScoreGate gate_;
  AdamW opt_;
  std::vector<std::size_t> order_;
  std::array<double, 3> oracle_means_ = {0.0, 0.0, 0.0};
};

}  // namespace

RunSummary run_training(const TrainPolicyConfig& cfg, const RlDataset& prompts,
                        const RewardSource& source, PolicyModel policy, const Vocabulary& vocab,
                        const PolicyModel* ref) {
  TrainingSession session(cfg, prompts, source, std::move(policy), vocab, ref);
  return session.run();
}

}  // namespace moslim
