// Acceptance suite: one quantitative gate per criterion, each printed as a
// single [PASS]/[FAIL] line. Run everything with no arguments, one gate with
// --criterion N, or list the gates with --list.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "moslim/bench.hpp"
#include "moslim/checkpoint.hpp"
#include "moslim/datagen.hpp"
#include "moslim/optim.hpp"
#include "moslim/policy.hpp"
#include "moslim/rewardmap.hpp"
#include "moslim/rewardmodel.hpp"
#include "moslim/rng.hpp"
#include "moslim/synthenv.hpp"
#include "moslim/util.hpp"

using namespace moslim;
namespace fs = std::filesystem;

namespace {

const Vocabulary kVocab = Vocabulary::standard();
const std::vector<Dimension> kDims = {Dimension::Helpfulness, Dimension::Honesty,
                                      Dimension::Harmlessness};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<double> fd_gradient(const std::function<double()>& f, std::span<double> params,
                                double h) {
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

double rel_err(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

LabeledSample random_labeled(const DataTypeScheme& scheme, Rng& rng, bool full) {
  LabeledSample s;
  s.question.resize(4);
  for (auto& t : s.question) t = rng.uniform_int(0, kVocab.size() - 1);
  s.answer.resize(6);
  for (auto& t : s.answer) t = rng.uniform_int(0, kVocab.size() - 1);
  s.label.assign(static_cast<std::size_t>(scheme.label_width()), 0);
  bool any = false;
  for (Dimension dim : kAllDimensions) {
    if (!full && rng.uniform() < 0.4) continue;
    any = true;
    const int cls = rng.uniform_int(0, scheme.level_count(dim) - 1);
    s.label[static_cast<std::size_t>(scheme.block_offset(dim) + cls)] = 1;
  }
  if (!any) s.label[0] = 1;
  return s;
}

PolicyModel perturbed_policy(std::uint64_t seed, double scale = 0.3) {
  PolicyModel policy(DataTypeScheme::from_id(4), kVocab.size(), 8, seed);
  Rng rng(derive_seed(seed, 1));
  for (auto& p : policy.mutable_params()) p = scale * rng.normal();
  return policy;
}

TaggedPrompt random_tagged(Rng& rng, const DataTypeScheme& scheme) {
  TaggedPrompt tp;
  tp.spec.set(kAllDimensions[static_cast<std::size_t>(rng.uniform_int(0, 2))],
              rng.uniform_int(1, scheme.level_count(Dimension::Harmlessness)));
  tp.body = "8 9 10";
  return tp;
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness across the four differentiable objectives.

Outcome criterion_gradients() {
  const auto start = std::chrono::steady_clock::now();
  constexpr double kTol = 1e-4;
  constexpr double kH = 1e-5;
  double worst = 0.0;

  // Reward-model total_loss: 20 random small instances.
  Rng seeds(0xACC1);
  for (int iter = 0; iter < 20; ++iter) {
    const auto scheme = DataTypeScheme::from_id(seeds.uniform_int(1, 4));
    MultiHeadRewardModel model(scheme, kDims, kVocab.size(), iter % 2 ? 5 : 0, seeds.next());
    model.randomize(seeds.next(), 0.4);
    Rng rng(seeds.next());
    std::vector<LabeledSample> batch;
    for (int i = 0; i < 3; ++i) batch.push_back(random_labeled(scheme, rng, false));
    std::vector<double> analytic;
    model.total_loss_grad(batch, analytic);
    const auto fd =
        fd_gradient([&] { return model.total_loss(batch); }, model.mutable_params(), kH);
    worst = std::max(worst, rel_err(analytic, fd));
  }

  // Policy logprob.
  for (int iter = 0; iter < 20; ++iter) {
    auto policy = perturbed_policy(seeds.next());
    Rng rng(seeds.next());
    const auto tp = random_tagged(rng, policy.scheme());
    std::vector<int> response(6);
    for (auto& t : response) t = rng.uniform_int(0, kVocab.size() - 1);
    std::vector<double> analytic(policy.params().size(), 0.0);
    policy.accumulate_logprob_grad(tp, kVocab, response, 1.0, analytic);
    const auto fd = fd_gradient(
        [&] {
          double total = 0.0;
          for (double v : policy.logprob(tp, kVocab, response)) total += v;
          return total;
        },
        policy.mutable_params(), kH);
    worst = std::max(worst, rel_err(analytic, fd));
  }

  // PPO clipped surrogate, evaluated off the sampling policy.
  const auto cfg = AlgoConfig::defaults_for(Algo::Ppo);
  for (int iter = 0; iter < 20; ++iter) {
    auto sampler = perturbed_policy(seeds.next());
    RolloutBatch batch;
    Rng rng(seeds.next());
    for (int j = 0; j < 4; ++j) {
      const auto tp = random_tagged(rng, sampler.scheme());
      auto traj = sampler.sample(tp, kVocab, 8, 1.0, rng.next());
      traj.ref_logprobs = traj.logprobs;
      batch.specs.push_back(tp.spec);
      batch.rewards.push_back(rng.normal());
      batch.trajectories.push_back(std::move(traj));
    }
    const auto advantages = ppo_advantages(batch, cfg);
    auto policy = sampler;
    for (auto& p : policy.mutable_params()) p += 0.01 * rng.normal();
    std::vector<double> analytic;
    ppo_surrogate(policy, batch, advantages, cfg, kVocab, &analytic);
    const auto fd = fd_gradient(
        [&] { return ppo_surrogate(policy, batch, advantages, cfg, kVocab).value; },
        policy.mutable_params(), kH);
    worst = std::max(worst, rel_err(analytic, fd));
  }

  // Online-DPO sigmoid preference loss.
  const auto odpo_cfg = AlgoConfig::defaults_for(Algo::Odpo);
  for (int iter = 0; iter < 20; ++iter) {
    auto policy = perturbed_policy(seeds.next());
    const auto ref = perturbed_policy(seeds.next());
    Rng rng(seeds.next());
    std::vector<PreferencePair> pairs;
    for (int j = 0; j < 2; ++j) {
      PreferencePair pair;
      pair.prompt = random_tagged(rng, policy.scheme());
      pair.winner = policy.sample(pair.prompt, kVocab, 5, 1.0, rng.next()).response;
      pair.loser = policy.sample(pair.prompt, kVocab, 5, 1.0, rng.next()).response;
      pairs.push_back(std::move(pair));
    }
    std::vector<double> analytic;
    odpo_loss(policy, ref, pairs, odpo_cfg, kVocab, &analytic);
    const auto fd = fd_gradient([&] { return odpo_loss(policy, ref, pairs, odpo_cfg, kVocab); },
                                policy.mutable_params(), kH);
    worst = std::max(worst, rel_err(analytic, fd));
  }

  const auto elapsed =
      std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - start);
  std::ostringstream detail;
  detail << "worst relative error " << worst << " (tol 1e-4), " << elapsed.count() << "s";
  return {worst <= kTol && elapsed.count() < 60, detail.str()};
}

// ---------------------------------------------------------------------------
// 2. Analytic loss values.

Outcome criterion_loss_analytics() {
  const auto scheme = DataTypeScheme::from_id(2);
  MultiHeadRewardModel model(scheme, kDims, kVocab.size(), 0, 1);
  Rng rng(2);
  std::vector<LabeledSample> batch;
  for (int i = 0; i < 16; ++i) batch.push_back(random_labeled(scheme, rng, true));
  const double rm_loss = model.total_loss(batch);
  const double rm_err = std::abs(rm_loss - 3.0 * std::log(2.0));

  auto policy = perturbed_policy(3);
  const auto ref = policy;
  std::vector<PreferencePair> pairs;
  for (int i = 0; i < 8; ++i) {
    PreferencePair pair;
    pair.prompt = random_tagged(rng, policy.scheme());
    pair.winner = policy.sample(pair.prompt, kVocab, 6, 1.0, rng.next()).response;
    pair.loser = policy.sample(pair.prompt, kVocab, 6, 1.0, rng.next()).response;
    pairs.push_back(std::move(pair));
  }
  const double dpo = odpo_loss(policy, ref, pairs, AlgoConfig::defaults_for(Algo::Odpo), kVocab);
  const double dpo_err = std::abs(dpo - std::log(2.0));

  std::ostringstream detail;
  detail << "rm loss " << rm_loss << " (|err| " << rm_err << " vs 1e-9), odpo loss " << dpo
         << " (|err| " << dpo_err << " vs 1e-12)";
  return {rm_err <= 1e-9 && dpo_err <= 1e-12, detail.str()};
}

// ---------------------------------------------------------------------------
// 3. Reward-mapping contract.

Outcome criterion_reward_mapping() {
  // Hand case via exactly pinned statistics.
  const auto scheme4 = DataTypeScheme::from_id(4);
  HeadStatistics pinned(scheme4, kDims);
  auto pinned_json = pinned.to_json("t", false);
  for (auto& [key, value] : pinned_json.items()) {
    if (key == "_header") continue;
    value = {{"mean", 0.5}, {"sqmean", 0.5 * 0.5 + 0.2 * 0.2}, {"count", 100}};
  }
  const auto stats4 = HeadStatistics::from_json(pinned_json);
  HeadDistribution dist;
  dist.dims = kDims;
  for (Dimension dim : kDims) {
    dist.probs.emplace_back(static_cast<std::size_t>(scheme4.level_count(dim)),
                            1.0 / scheme4.level_count(dim));
  }
  dist.probs[0][4] = 0.9;
  PreferenceSpec one;
  one.set(Dimension::Helpfulness, 5);
  const double hand = map_reward(dist, one, stats4).value;
  const double hand_err = std::abs(hand - (1.0 / 3.0) * (0.9 - 0.5) / 0.2);
  bool ok = hand_err <= 1e-12;

  // Mask zeroing and monotonicity.
  Rng rng(7);
  const double base = map_reward(dist, one, stats4).value;
  for (int iter = 0; iter < 50; ++iter) {
    for (std::size_t h : {std::size_t{1}, std::size_t{2}}) {
      double total = 0.0;
      for (auto& p : dist.probs[h]) total += (p = rng.uniform() + 0.01);
      for (auto& p : dist.probs[h]) p /= total;
    }
    ok = ok && map_reward(dist, one, stats4).value == base;
  }
  double prev = -1e18;
  for (double p = 0.1; p <= 0.9; p += 0.1) {
    dist.probs[0][4] = p;
    const double value = map_reward(dist, one, stats4).value;
    ok = ok && value > prev;
    prev = value;
  }

  // Calibrated standardization on held-out data.
  const auto scheme = DataTypeScheme::from_id(2);
  const auto train = build_rm_dataset(6000, scheme, 31, kVocab);
  RmConfig cfg;
  cfg.seed = 32;
  cfg.epochs = 2;
  const auto model = train_rm(train, cfg);
  const auto calib = build_rm_dataset(10000, scheme, 33, kVocab);
  const auto stats = calibrate_stats(model, calib, 0.99);
  const auto held = build_rm_dataset(10000, scheme, 34, kVocab);
  double total = 0.0, total_sq = 0.0;
  std::size_t n = 0;
  for (const auto& s : held.samples) {
    const auto d = model.forward(s.question, s.answer, kVocab);
    for (int h = 0; h < model.head_count(); ++h) {
      const Dimension dim = model.dims()[static_cast<std::size_t>(h)];
      if (!s.dim_labeled(dim, scheme)) continue;
      const int cls = s.label_class(dim, scheme);
      const double z = (d.probs[static_cast<std::size_t>(h)][static_cast<std::size_t>(cls)] -
                        stats.mean(dim, cls)) /
                       stats.stddev(dim, cls);
      total += z;
      total_sq += z * z;
      ++n;
    }
  }
  const double mean = total / static_cast<double>(n);
  const double stddev = std::sqrt(total_sq / static_cast<double>(n) - mean * mean);
  const bool calibration_ok = mean >= -0.1 && mean <= 0.1 && stddev >= 0.8 && stddev <= 1.2;

  std::ostringstream detail;
  detail << "hand case err " << hand_err << ", standardized mean " << mean << " (in [-0.1,0.1]), std "
         << stddev << " (in [0.8,1.2])";
  return {ok && calibration_ok, detail.str()};
}

// ---------------------------------------------------------------------------
// 4. Reward-model learnability.

Outcome criterion_rm_learnability() {
  const auto start = std::chrono::steady_clock::now();
  RmConfig cfg;
  cfg.seed = 41;
  cfg.epochs = 12;

  const auto train1 = build_rm_dataset(10000, DataTypeScheme::from_id(1), 42, kVocab);
  const auto held1 = build_rm_dataset(10000, DataTypeScheme::from_id(1), 43, kVocab);
  const auto model1 = train_rm(train1, cfg);
  const auto eval1 = evaluate_rm(model1, held1);

  const auto train4 = build_rm_dataset(10000, DataTypeScheme::from_id(4), 44, kVocab);
  const auto held4 = build_rm_dataset(10000, DataTypeScheme::from_id(4), 45, kVocab);
  const auto model4 = train_rm(train4, cfg);
  const auto eval4 = evaluate_rm(model4, held4);

  const auto elapsed =
      std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - start);
  std::ostringstream detail;
  detail << "intensity accuracy dt1 " << eval1.intensity_accuracy << " (>= 0.95), dt4 "
         << eval4.intensity_accuracy << " (>= 0.60), " << elapsed.count() << "s";
  return {eval1.intensity_accuracy >= 0.95 && eval4.intensity_accuracy >= 0.60 &&
              elapsed.count() < 300,
          detail.str()};
}

// ---------------------------------------------------------------------------
// 5. Leave-one-out advantage algebra.

Outcome criterion_rloo_algebra() {
  Rng rng(51);
  int exact = 0;
  const int groups = 1000;
  for (int iter = 0; iter < groups; ++iter) {
    const int k = rng.uniform_int(2, 8);
    std::vector<double> rewards(static_cast<std::size_t>(k));
    for (auto& r : rewards) r = 4.0 * rng.normal();
    const auto adv = rloo_advantages(rewards);
    double sum = 0.0;
    for (double a : adv) sum += a;
    if (sum == 0.0) ++exact;
  }
  std::ostringstream detail;
  detail << exact << "/" << groups << " groups sum to exactly zero";
  return {exact == groups, detail.str()};
}

// ---------------------------------------------------------------------------
// 6. One-hot merge identity.

Outcome criterion_merge_identity() {
  bool ok = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<PolicyModel> policies;
    for (std::uint64_t j = 0; j < 3; ++j) policies.push_back(perturbed_policy(seed * 10 + j));
    for (std::size_t hot = 0; hot < 3; ++hot) {
      std::vector<double> lambdas(3, 0.0);
      lambdas[hot] = 1.0;
      const auto merged = merge_policies(policies, lambdas);
      const auto expect = policies[hot].params();
      ok = ok && merged.params().size() == expect.size();
      for (std::size_t i = 0; ok && i < expect.size(); ++i) {
        ok = std::memcmp(&merged.params()[i], &expect[i], sizeof(double)) == 0;
      }
    }
  }
  return {ok, ok ? "one-hot merges reproduce source parameters bit-exactly"
                 : "bitwise mismatch in merged parameters"};
}

// ---------------------------------------------------------------------------
// 7 & 8 share trained policies.

struct ControllabilityRun {
  MultiHeadRewardModel rm;
  HeadStatistics stats;
  RlDataset prompts;
};

ControllabilityRun controllability_setup() {
  ControllabilityRun run;
  const auto scheme = DataTypeScheme::from_id(4);
  const auto rm_data = build_rm_dataset(20000, scheme, 71, kVocab);
  RmConfig cfg;
  cfg.seed = 72;
  cfg.epochs = 12;
  run.rm = train_rm(rm_data, cfg);
  run.stats = calibrate_stats(run.rm, rm_data, 0.99);
  run.prompts = build_rl_dataset(2000, scheme, 73, kVocab);
  return run;
}

constexpr int kControllabilitySteps = 2000;  // criterion caps this at 2000
constexpr std::array<std::uint64_t, 5> kSeeds = {1, 2, 3, 4, 5};

PolicyModel train_controllability_policy(const ControllabilityRun& run, Algo algo,
                                         std::uint64_t seed) {
  TrainPolicyConfig cfg;
  cfg.algo = AlgoConfig::defaults_for(algo);
  cfg.steps = kControllabilitySteps;
  cfg.log_interval = 500;
  cfg.seed = seed;
  RewardSource source;
  source.rm = &run.rm;
  source.stats = &run.stats;
  PolicyModel policy(run.prompts.scheme, kVocab.size(), kDefaultEmbedDim,
                     derive_seed(seed, 0x717ULL));
  return run_training(cfg, run.prompts, source, std::move(policy), kVocab).policy;
}

Outcome criterion_controllability() {
  const auto start = std::chrono::steady_clock::now();
  const auto run = controllability_setup();
  std::ostringstream detail;
  bool ok = true;
  for (Algo algo : {Algo::Ppo, Algo::Rloo, Algo::Odpo}) {
    std::vector<double> rhos, gaps;
    for (std::uint64_t seed : kSeeds) {
      const auto policy = train_controllability_policy(run, algo, seed);
      const auto sweep = intensity_sweep(policy, Dimension::Helpfulness, run.prompts.scheme, 500,
                                         derive_seed(seed, 0x5EEDULL), kVocab);
      std::vector<double> ns, means;
      double lo = 1e300, hi = -1e300;
      for (const auto& row : sweep.rows) {
        ns.push_back(row.n);
        means.push_back(row.mean);
        lo = std::min(lo, row.mean);
        hi = std::max(hi, row.mean);
      }
      rhos.push_back(spearman(ns, means));
      gaps.push_back(hi - lo);
    }
    const double med_rho = median(rhos);
    const double med_gap = median(gaps);
    detail << algo_name(algo) << ": median rho " << med_rho << ", median gap " << med_gap << "; ";
    ok = ok && med_rho >= 0.9 && med_gap >= 1.0;
  }
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - start);
  detail << elapsed.count() << "s";
  return {ok && elapsed.count() < 1800, detail.str()};
}

Outcome criterion_dimension_controllability() {
  const auto run = controllability_setup();
  // Margins per (pair, prompted dimension), against the tag-free condition.
  std::vector<std::vector<double>> margins(6);
  std::vector<double> harmless_margins[2];
  std::vector<std::string> labels;
  for (std::uint64_t seed : kSeeds) {
    const auto policy = train_controllability_policy(run, Algo::Odpo, seed);
    const auto pairs =
        pairing_eval(policy, run.prompts.scheme, 500, derive_seed(seed, 0x9a11ULL), kVocab);
    // Tag-free baseline: the unprompted condition.
    double base_help = 0.0, base_honest = 0.0, base_harmless = 0.0;
    const int n = 500;
    for (int j = 0; j < n; ++j) {
      TaggedPrompt tp;
      tp.body = render_body(
          sample_prompt_tokens(derive_seed(seed ^ 0xba5eULL, static_cast<std::uint64_t>(j)), 8,
                               kVocab));
      const auto traj = policy.sample(tp, kVocab, kDefaultResponseLength, 1.0,
                                      derive_seed(seed ^ 0x5a5aULL, static_cast<std::uint64_t>(j)));
      const auto s = oracle_score(traj.response, kVocab);
      base_help += s.helpfulness;
      base_honest += s.honesty;
      base_harmless += s.harmlessness;
    }
    base_help /= n;
    base_honest /= n;
    base_harmless /= n;
    auto baseline = [&](Dimension dim) {
      switch (dim) {
        case Dimension::Helpfulness: return base_help;
        case Dimension::Honesty: return base_honest;
        case Dimension::Harmlessness: return base_harmless;
      }
      return 0.0;
    };
    std::size_t slot = 0;
    labels.clear();
    for (const auto& pair : pairs) {
      for (Dimension dim : {pair.dim_a, pair.dim_b}) {
        margins[slot].push_back(pair.mean_for(dim) - baseline(dim));
        labels.push_back(std::string(tag_name(pair.dim_a)) + "+" + tag_name(pair.dim_b) + ":" +
                         tag_name(dim));
        ++slot;
      }
    }
  }
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t slot = 0; slot < margins.size(); ++slot) {
    const bool is_harmless = labels[slot].rfind(":harmless") != std::string::npos;
    const double threshold = is_harmless ? 0.2 : 0.5;
    const double med = median(margins[slot]);
    detail << labels[slot] << " " << med << (med >= threshold ? "" : " [below threshold]") << "; ";
    ok = ok && med >= threshold;
  }
  return {ok, detail.str()};
}

// ---------------------------------------------------------------------------
// 9. Pipeline determinism.

std::string pipeline_digest(const fs::path& dir, int workers) {
  fs::create_directories(dir);
  const auto scheme = DataTypeScheme::from_id(2);
  DatagenConfig dg;
  dg.workers = workers;
  const auto rm_data = build_rm_dataset(2000, scheme, 91, kVocab, dg);
  save_rm_dataset(rm_data, (dir / "rm.jsonl").string(), "cfg");
  const auto rl_data = build_rl_dataset(200, scheme, 92, kVocab, dg);
  save_rl_dataset(rl_data, (dir / "rl.jsonl").string(), "cfg");

  RmConfig rm_cfg;
  rm_cfg.seed = 93;
  rm_cfg.epochs = 2;
  HeadStatistics stats;
  const auto rm = train_rm(rm_data, rm_cfg, &stats);
  Checkpoint rm_ckpt = rm.to_checkpoint(kVocab.hash());
  stamp_header(rm_ckpt.header, "cfg", false);
  save_checkpoint(rm_ckpt, (dir / "rm.ckpt").string());
  const auto calibrated = calibrate_stats(rm, rm_data, 0.99);
  calibrated.save((dir / "stats.json").string(), "cfg", false);

  TrainPolicyConfig cfg;
  cfg.algo = AlgoConfig::defaults_for(Algo::Ppo);
  cfg.algo.batch_size = 16;
  cfg.steps = 40;
  cfg.log_interval = 10;
  cfg.seed = 94;
  cfg.workers = workers;
  cfg.metrics_path = (dir / "metrics.jsonl").string();
  cfg.checkpoint_path = (dir / "policy.ckpt").string();
  cfg.with_timestamp = false;
  cfg.config_hash = "cfg";
  RewardSource source;
  source.rm = &rm;
  source.stats = &calibrated;
  PolicyModel policy(scheme, kVocab.size(), 8, 95);
  run_training(cfg, rl_data, source, std::move(policy), kVocab);

  std::string digest;
  for (const char* name : {"rm.jsonl", "rl.jsonl", "rm.ckpt", "stats.json", "metrics.jsonl",
                           "policy.ckpt"}) {
    digest += name;
    digest += ':';
    digest += to_hex(fnv1a(read_file((dir / name).string())));
    digest += '\n';
  }
  return digest;
}

Outcome criterion_determinism() {
  const auto root = fs::temp_directory_path() / "moslim_acceptance_det";
  fs::remove_all(root);
  const auto d1 = pipeline_digest(root / "run1_w1", 1);
  const auto d2 = pipeline_digest(root / "run2_w1", 1);
  const auto d3 = pipeline_digest(root / "run3_w4", 4);
  const auto d4 = pipeline_digest(root / "run4_w4", 4);
  fs::remove_all(root);
  const bool ok = d1 == d2 && d3 == d4 && d1 == d3;
  return {ok, ok ? "byte-identical outputs across reruns at workers=1 and workers=4"
                 : "file digests differ between runs"};
}

// ---------------------------------------------------------------------------
// 10. Tag-stripping boundary.

Outcome criterion_tag_boundary() {
  const auto scheme = DataTypeScheme::from_id(4);
  const auto rm_data = build_rm_dataset(4000, scheme, 101, kVocab);
  RmConfig rm_cfg;
  rm_cfg.seed = 102;
  rm_cfg.epochs = 3;
  HeadStatistics stats;
  const auto rm = train_rm(rm_data, rm_cfg, &stats);
  const auto prompts = build_rl_dataset(500, scheme, 103, kVocab);

  std::uint64_t invocations = 0, violations = 0;
  for (Algo algo : {Algo::Ppo, Algo::Rloo, Algo::Odpo}) {
    TrainPolicyConfig cfg;
    cfg.algo = AlgoConfig::defaults_for(algo);
    cfg.algo.batch_size = 16;
    cfg.steps = 100;
    cfg.log_interval = 50;
    cfg.seed = 104;
    RewardSource source;
    source.rm = &rm;
    source.stats = &stats;
    PolicyModel policy(scheme, kVocab.size(), 8, 105);
    const auto summary = run_training(cfg, prompts, source, std::move(policy), kVocab);
    invocations += summary.rm_invocations;
    violations += summary.rm_tag_violations;
  }
  std::ostringstream detail;
  detail << invocations << " reward-model invocations, " << violations << " carried tag tokens";
  return {invocations > 0 && violations == 0, detail.str()};
}

// ---------------------------------------------------------------------------

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> fn;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "gradient correctness (rm loss, policy logprob, ppo surrogate, odpo loss)",
       criterion_gradients},
      {2, "analytic losses (3 ln 2 fresh rm; ln 2 odpo at reference)", criterion_loss_analytics},
      {3, "reward-mapping contract and calibrated standardization", criterion_reward_mapping},
      {4, "reward-model learnability (dt1 >= 0.95, dt4 >= 0.60)", criterion_rm_learnability},
      {5, "leave-one-out advantages sum to zero exactly", criterion_rloo_algebra},
      {6, "one-hot parameter merge reproduces sources bit-exactly", criterion_merge_identity},
      {7, "intensity controllability (spearman >= 0.9, gap >= 1.0, 5-seed median)",
       criterion_controllability},
      {8, "dimension controllability (pair-prompt margins, 5-seed median)",
       criterion_dimension_controllability},
      {9, "pipeline determinism at workers=1 and workers=4", criterion_determinism},
      {10, "reward model never scores tagged text", criterion_tag_boundary},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--list") {
      for (const auto& c : criteria()) std::cout << c.id << ": " << c.name << "\n";
      return 0;
    }
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (arg.rfind("--criterion=", 0) == 0) {
      only = std::atoi(arg.c_str() + 12);
    } else {
      std::cerr << "usage: acceptance [--list] [--criterion N]\n";
      return 1;
    }
  }

  int failures = 0, ran = 0;
  for (const auto& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    Outcome outcome;
    try {
      outcome = c.fn();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << "criterion " << c.id << ": " << c.name
              << " -- " << outcome.detail << "\n";
    failures += outcome.pass ? 0 : 1;
  }
  if (ran == 0) {
    std::cerr << "unknown criterion " << only << "\n";
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
