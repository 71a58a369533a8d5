// moslim: multi-objective preference alignment harness.
//
// Pipeline subcommands: datagen -> train-rm -> calibrate -> train-policy ->
// sweep/pairing -> report, plus merge (parameter soups), eval-rm and
// selftest. All randomness flows from --seed; reruns with the same
// configuration are byte-identical (pass --no-timestamp to make headers
// reproducible too).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "moslim/bench.hpp"
#include "moslim/checkpoint.hpp"
#include "moslim/config.hpp"
#include "moslim/datagen.hpp"
#include "moslim/optim.hpp"
#include "moslim/policy.hpp"
#include "moslim/prefgrammar.hpp"
#include "moslim/rewardmap.hpp"
#include "moslim/rewardmodel.hpp"
#include "moslim/rng.hpp"
#include "moslim/synthenv.hpp"
#include "moslim/util.hpp"

namespace fs = std::filesystem;
using namespace moslim;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::uint64_t seed = 0;
  int workers = 1;
  bool no_timestamp = false;
  std::string home;
  std::string config_path;

  std::string artifact_root() const {
    if (!home.empty()) return home;
    if (const char* env = std::getenv("MOSLIM_HOME")) return env;
    return "artifacts";
  }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--seed", opts.seed, "global random seed");
  cmd->add_option("--workers", opts.workers, "worker fan-out (1 = reference mode)")
      ->check(CLI::Range(1, 256));
  cmd->add_flag("--no-timestamp", opts.no_timestamp, "omit timestamps from file headers");
  cmd->add_option("--home", opts.home, "artifact root (overrides MOSLIM_HOME)");
  cmd->add_option("--config", opts.config_path, "flat key = value config file");
}

std::string resolved(const CommonOpts& opts, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  const fs::path root(opts.artifact_root());
  fs::create_directories(root);
  return (root / path).string();
}

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

// The file-level config hash covers the semantic configuration: command,
// scheme, seeds and algorithm settings, but not worker counts or paths.
std::string hash_config(const FlatConfig& cfg) { return cfg.semantic_hash(); }

FlatConfig base_config(const CommonOpts& opts, const std::string& command) {
  FlatConfig cfg = opts.config_path.empty() ? FlatConfig{} : FlatConfig::load(opts.config_path);
  cfg.set("command", command);
  cfg.set("seed", std::to_string(opts.seed));
  cfg.set("workers", std::to_string(opts.workers));
  return cfg;
}

MultiHeadRewardModel load_rm(const std::string& path) {
  return MultiHeadRewardModel::from_checkpoint(load_checkpoint(path));
}

PolicyModel load_policy(const std::string& path) {
  return PolicyModel::from_checkpoint(load_checkpoint(path));
}

void check_scheme(int expected, int actual, const std::string& what) {
  if (expected != actual) {
    raise(ErrorCode::SchemeMismatch,
          what + " uses scheme " + std::to_string(actual) + ", expected " + std::to_string(expected));
  }
}

Dimension parse_dim_arg(const std::string& name) {
  const auto dim = dimension_from_tag_name(name);
  if (!dim) raise(ErrorCode::ConfigInvalid, "unknown dimension '" + name + "'");
  return *dim;
}

std::vector<double> parse_weights(const std::string& csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const auto comma = csv.find(',', pos);
    const auto token = csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!token.empty()) out.push_back(std::stod(token));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) raise(ErrorCode::ConfigInvalid, "empty weight list");
  return out;
}

std::vector<std::string> parse_paths(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const auto comma = csv.find(',', pos);
    const auto token = csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!token.empty()) out.push_back(token);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// Single-head baseline training: keep one dimension's labels and reuse the
// shared training loop on the filtered dataset.
MultiHeadRewardModel train_single_head(const RmDataset& dataset, Dimension dim,
                                       const RmConfig& cfg) {
  RmDataset filtered = dataset;
  for (auto& s : filtered.samples) {
    for (Dimension other : kAllDimensions) {
      if (other == dim) continue;
      const int off = filtered.scheme.block_offset(other);
      for (int j = 0; j < filtered.scheme.level_count(other); ++j) {
        s.label[static_cast<std::size_t>(off + j)] = 0;
      }
    }
  }
  std::erase_if(filtered.samples, [&](const LabeledSample& s) {
    return !s.dim_labeled(dim, filtered.scheme);
  });
  if (filtered.samples.empty()) {
    raise(ErrorCode::EmptyDataset, std::string("no labels for ") + tag_name(dim));
  }
  MultiHeadRewardModel model(filtered.scheme, {dim}, filtered.vocab.size(), cfg.hidden, cfg.seed);
  AdamW opt;
  opt.lr = cfg.lr;
  opt.weight_decay = cfg.weight_decay;
  opt.reset(model.params().size());
  std::vector<std::size_t> order(filtered.samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad;
  std::vector<LabeledSample> batch;
  std::int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, 0xe0000ULL + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(cfg.batch_size)) {
      batch.clear();
      const auto end = std::min(order.size(), pos + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t i = pos; i < end; ++i) batch.push_back(filtered.samples[order[i]]);
      model.total_loss_grad(batch, grad);
      opt.step(model.mutable_params(), grad, warmup_scale(step, cfg.warmup_steps));
      ++step;
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// selftest: fast invariant sweep across the whole stack.

int run_selftest() {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    failures += ok ? 0 : 1;
  };

  const auto vocab = Vocabulary::standard();
  const auto scheme = DataTypeScheme::from_id(4);
  const std::vector<Dimension> all_dims(kAllDimensions.begin(), kAllDimensions.end());

  {
    Rng rng(1);
    bool ok = true;
    for (int i = 0; i < 500 && ok; ++i) {
      TaggedPrompt tp;
      for (Dimension dim : kAllDimensions) {
        if (rng.uniform() < 0.5) tp.spec.set(dim, rng.uniform_int(1, scheme.level_count(dim)));
      }
      tp.body = i % 2 == 0 ? "task text" : "";
      ok = parse_prefix(serialize_prefix(tp), scheme.levels) == tp;
    }
    check("prefix grammar round-trip", ok);
  }
  {
    bool ok = strip_tags("<helpfulness 5> Q") == "Q" && strip_tags("Q") == "Q";
    ok = ok && strip_tags(strip_tags("<harmless max> body")) == "body";
    check("tag stripping idempotent", ok);
  }
  {
    MultiHeadRewardModel model(scheme, all_dims, vocab.size(), 0, 1);
    const auto dist = model.forward(std::vector<int>{4, 5}, std::vector<int>{6, 7}, vocab);
    bool ok = true;
    for (const auto& probs : dist.probs) {
      double total = 0.0;
      for (double p : probs) total += p;
      ok = ok && std::abs(total - 1.0) <= 1e-9;
    }
    check("softmax normalization", ok);
  }
  {
    Rng rng(2);
    bool ok = true;
    for (int iter = 0; iter < 200 && ok; ++iter) {
      std::vector<double> rewards(static_cast<std::size_t>(rng.uniform_int(2, 6)));
      for (auto& r : rewards) r = rng.normal();
      const auto adv = rloo_advantages(rewards);
      double sum = 0.0;
      for (double a : adv) sum += a;
      ok = sum == 0.0;
    }
    check("leave-one-out advantages sum to zero", ok);
  }
  {
    PolicyModel a(scheme, vocab.size(), 8, 3);
    PolicyModel b(scheme, vocab.size(), 8, 4);
    const auto merged =
        merge_policies(std::vector<PolicyModel>{a, b}, std::vector<double>{1.0, 0.0});
    bool ok = merged.params().size() == a.params().size();
    for (std::size_t i = 0; ok && i < a.params().size(); ++i) {
      ok = merged.params()[i] == a.params()[i];
    }
    check("one-hot merge identity", ok);
  }
  {
    HeadStatistics stats(scheme, all_dims);
    for (int i = 0; i < 2000; ++i) stats.update(Dimension::Helpfulness, 0, 0.5);
    const bool ok = std::abs(stats.mean(Dimension::Helpfulness, 0) - 0.5) < 1e-9 &&
                    stats.stddev(Dimension::Helpfulness, 0) <= 1e-3;
    check("running statistics fixed point", ok);
  }
  {
    MultiHeadRewardModel model(DataTypeScheme::from_id(2), all_dims, vocab.size(), 0, 5);
    model.randomize(6, 0.3);
    const auto ds = build_rm_dataset(4, DataTypeScheme::from_id(2), 7, vocab);
    std::vector<double> grad;
    model.total_loss_grad(ds.samples, grad);
    auto params = model.mutable_params();
    double max_err = 0.0;
    for (std::size_t i = 0; i < params.size(); i += 37) {
      const double saved = params[i];
      const double h = 1e-5;
      params[i] = saved + h;
      const double hi = model.total_loss(ds.samples);
      params[i] = saved - h;
      const double lo = model.total_loss(ds.samples);
      params[i] = saved;
      const double fd = (hi - lo) / (2.0 * h);
      max_err = std::max(max_err, std::abs(fd - grad[i]) / std::max(1.0, std::abs(fd)));
    }
    check("loss gradient spot check", max_err <= 1e-4);
  }
  {
    const auto ds = build_rl_dataset(50, scheme, 8, vocab);
    bool ok = true;
    for (const auto& s : ds.samples) {
      ok = ok && s.tagged.spec.active_count() >= 1 && s.tagged.spec.active_count() <= 3;
    }
    check("prompt dataset specs in range", ok);
  }

  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : 2;
}

// ---------------------------------------------------------------------------

int dispatch(int argc, char** argv) {
  CLI::App app{"multi-objective preference alignment harness"};
  app.require_subcommand(1);

  // --- datagen ---------------------------------------------------------
  CommonOpts datagen_opts;
  auto* datagen = app.add_subcommand("datagen", "generate training datasets");
  datagen->require_subcommand(1);
  int dg_scheme = 4;
  int dg_n = 1000;
  std::string dg_out;
  std::string dg_label_mode = "full";
  double dg_pool_a = 0.5;

  auto* dg_rm = datagen->add_subcommand("rm", "reward-model training data");
  add_common(dg_rm, datagen_opts);
  dg_rm->add_option("--scheme", dg_scheme, "data scheme 1..4")->check(CLI::Range(1, 4));
  dg_rm->add_option("--n", dg_n, "sample count")->required();
  dg_rm->add_option("--out", dg_out, "output JSONL path")->required();
  dg_rm->add_option("--label-mode", dg_label_mode, "full | pools | random_subset");
  dg_rm->add_option("--pool-a-fraction", dg_pool_a, "pools mode: helpfulness+honesty share");

  auto* dg_rl = datagen->add_subcommand("rl", "policy-optimization prompts");
  add_common(dg_rl, datagen_opts);
  dg_rl->add_option("--scheme", dg_scheme, "data scheme 1..4")->check(CLI::Range(1, 4));
  dg_rl->add_option("--n", dg_n, "sample count")->required();
  dg_rl->add_option("--out", dg_out, "output JSONL path")->required();

  // --- train-rm --------------------------------------------------------
  CommonOpts trm_opts;
  std::string trm_data, trm_out, trm_stats_out, trm_dim, trm_preset = "desk";
  RmConfig trm_cfg;
  auto* train_rm_cmd = app.add_subcommand("train-rm", "train the classification reward model");
  add_common(train_rm_cmd, trm_opts);
  train_rm_cmd->add_option("--data", trm_data, "RM dataset JSONL")->required();
  train_rm_cmd->add_option("--out", trm_out, "checkpoint path")->required();
  train_rm_cmd->add_option("--stats-out", trm_stats_out, "also write training-time statistics");
  train_rm_cmd->add_option("--dim", trm_dim, "train a single-head model for one dimension");
  train_rm_cmd->add_option("--preset", trm_preset, "desk | paper hyperparameters");
  train_rm_cmd->add_option("--lr", trm_cfg.lr, "learning rate");
  train_rm_cmd->add_option("--epochs", trm_cfg.epochs, "training epochs");
  train_rm_cmd->add_option("--batch-size", trm_cfg.batch_size, "minibatch size");
  train_rm_cmd->add_option("--hidden", trm_cfg.hidden, "hidden width (0 = linear)");
  train_rm_cmd->add_option("--warmup-steps", trm_cfg.warmup_steps, "linear warmup steps");
  train_rm_cmd->add_option("--weight-decay", trm_cfg.weight_decay, "decoupled weight decay");

  // --- eval-rm ---------------------------------------------------------
  CommonOpts erm_opts;
  std::string erm_model, erm_data, erm_out;
  auto* eval_rm_cmd = app.add_subcommand("eval-rm", "evaluate reward-model accuracy");
  add_common(eval_rm_cmd, erm_opts);
  eval_rm_cmd->add_option("--model", erm_model, "RM checkpoint")->required();
  eval_rm_cmd->add_option("--data", erm_data, "held-out dataset JSONL")->required();
  eval_rm_cmd->add_option("--out", erm_out, "optional JSON result path");

  // --- calibrate -------------------------------------------------------
  CommonOpts cal_opts;
  std::string cal_model, cal_data, cal_out;
  double cal_beta = 0.99;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "record per-(head,intensity) statistics");
  add_common(calibrate_cmd, cal_opts);
  calibrate_cmd->add_option("--model", cal_model, "RM checkpoint")->required();
  calibrate_cmd->add_option("--data", cal_data, "calibration dataset JSONL")->required();
  calibrate_cmd->add_option("--out", cal_out, "statistics JSON path")->required();
  calibrate_cmd->add_option("--beta", cal_beta, "EMA decay");

  // --- train-policy ----------------------------------------------------
  CommonOpts tp_opts;
  std::string tp_algo = "ppo";
  std::string tp_rm, tp_stats, tp_prompts, tp_out, tp_metrics, tp_scalar_rms, tp_weights;
  std::string tp_preset = "desk";
  std::string tp_init_from;
  TrainPolicyConfig tp_cfg;
  double tp_lr = -1.0, tp_kl = -1.0, tp_clip = -1.0, tp_dpo_beta = -1.0;
  int tp_batch = -1, tp_rloo_k = -1, tp_epochs = -1, tp_embed = kDefaultEmbedDim;
  auto* train_policy_cmd = app.add_subcommand("train-policy", "policy optimization");
  add_common(train_policy_cmd, tp_opts);
  train_policy_cmd->add_option("--algo", tp_algo, "ppo | rloo | odpo | morlhf")->required();
  train_policy_cmd->add_option("--rm", tp_rm, "multi-head RM checkpoint");
  train_policy_cmd->add_option("--stats", tp_stats, "calibrated statistics JSON");
  train_policy_cmd->add_option("--scalar-rms", tp_scalar_rms,
                               "comma-separated per-dimension RM checkpoints (morlhf)");
  train_policy_cmd->add_option("--weights", tp_weights, "morlhf simplex weights w1,w2,w3");
  train_policy_cmd->add_option("--prompts", tp_prompts, "RL prompt dataset JSONL")->required();
  train_policy_cmd->add_option("--out", tp_out, "policy checkpoint path")->required();
  train_policy_cmd->add_option("--metrics", tp_metrics, "metrics JSONL path");
  train_policy_cmd->add_option("--steps", tp_cfg.steps, "training steps");
  train_policy_cmd->add_option("--log-interval", tp_cfg.log_interval, "steps between metric rows");
  train_policy_cmd->add_option("--max-len", tp_cfg.max_len, "rollout length cap");
  train_policy_cmd->add_option("--temperature", tp_cfg.temperature, "sampling temperature");
  train_policy_cmd->add_option("--embed-dim", tp_embed, "policy embedding width");
  train_policy_cmd->add_option("--lr", tp_lr, "learning rate");
  train_policy_cmd->add_option("--kl-coef", tp_kl, "KL penalty coefficient");
  train_policy_cmd->add_option("--clip-eps", tp_clip, "PPO clip range");
  train_policy_cmd->add_option("--dpo-beta", tp_dpo_beta, "implicit-reward scale");
  train_policy_cmd->add_option("--batch-size", tp_batch, "prompts per step");
  train_policy_cmd->add_option("--rloo-k", tp_rloo_k, "samples per prompt group");
  train_policy_cmd->add_option("--epochs", tp_epochs, "optimization passes per batch");
  train_policy_cmd->add_option("--preset", tp_preset, "desk | paper hyperparameters");
  train_policy_cmd->add_option("--init-from", tp_init_from, "warm-start policy checkpoint");

  // --- merge -----------------------------------------------------------
  CommonOpts merge_opts;
  std::string merge_inputs, merge_lambdas, merge_out;
  bool merge_allow_unnormalized = false;
  auto* merge_cmd = app.add_subcommand("merge", "convex policy parameter combination");
  add_common(merge_cmd, merge_opts);
  merge_cmd->add_option("--inputs", merge_inputs, "comma-separated policy checkpoints")->required();
  merge_cmd->add_option("--lambdas", merge_lambdas, "comma-separated weights")->required();
  merge_cmd->add_option("--out", merge_out, "merged checkpoint path")->required();
  merge_cmd->add_flag("--allow-unnormalized", merge_allow_unnormalized,
                      "skip the simplex constraint");

  // --- sweep -----------------------------------------------------------
  CommonOpts sweep_opts;
  std::string sweep_policy, sweep_dim = "helpfulness", sweep_out_dir = "reports";
  int sweep_scheme = 4, sweep_samples = 500;
  auto* sweep_cmd = app.add_subcommand("sweep", "intensity controllability sweep");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--policy", sweep_policy, "policy checkpoint")->required();
  sweep_cmd->add_option("--dim", sweep_dim, "dimension tag name");
  sweep_cmd->add_option("--scheme", sweep_scheme, "data scheme 1..4")->check(CLI::Range(1, 4));
  sweep_cmd->add_option("--n-samples", sweep_samples, "samples per intensity");
  sweep_cmd->add_option("--out", sweep_out_dir, "report directory");

  // --- pairing ---------------------------------------------------------
  CommonOpts pair_opts;
  std::string pair_policy, pair_out_dir = "reports";
  int pair_scheme = 4, pair_samples = 500;
  auto* pairing_cmd = app.add_subcommand("pairing", "dimension controllability pairings");
  add_common(pairing_cmd, pair_opts);
  pairing_cmd->add_option("--policy", pair_policy, "policy checkpoint")->required();
  pairing_cmd->add_option("--scheme", pair_scheme, "data scheme 1..4")->check(CLI::Range(1, 4));
  pairing_cmd->add_option("--n-samples", pair_samples, "samples per pair");
  pairing_cmd->add_option("--out", pair_out_dir, "report directory");

  // --- report ----------------------------------------------------------
  CommonOpts report_opts;
  std::string report_sweeps, report_pairing, report_out = "reports";
  auto* report_cmd = app.add_subcommand("report", "render CSV results to charts");
  add_common(report_cmd, report_opts);
  report_cmd->add_option("--sweeps", report_sweeps, "comma-separated sweep CSVs");
  report_cmd->add_option("--pairing", report_pairing, "pairing CSV");
  report_cmd->add_option("--out", report_out, "report directory");

  // --- selftest --------------------------------------------------------
  auto* selftest_cmd = app.add_subcommand("selftest", "run the invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const auto vocab = Vocabulary::standard();

  if (selftest_cmd->parsed()) return run_selftest();

  if (dg_rm->parsed() || dg_rl->parsed()) {
    const bool rm_mode = dg_rm->parsed();
    auto flat = base_config(datagen_opts, rm_mode ? "datagen-rm" : "datagen-rl");
    flat.set("scheme", std::to_string(dg_scheme));
    flat.set("n", std::to_string(dg_n));
    flat.set("label_mode", dg_label_mode);
    const auto scheme = DataTypeScheme::from_id(dg_scheme);
    DatagenConfig cfg;
    cfg.workers = datagen_opts.workers;
    cfg.label_mode = label_mode_from_name(dg_label_mode);
    cfg.pool_a_fraction = dg_pool_a;
    const auto out = resolved(datagen_opts, dg_out);
    ensure_parent(out);
    if (rm_mode) {
      save_rm_dataset(build_rm_dataset(dg_n, scheme, datagen_opts.seed, vocab, cfg), out,
                      hash_config(flat));
    } else {
      save_rl_dataset(build_rl_dataset(dg_n, scheme, datagen_opts.seed, vocab, cfg), out,
                      hash_config(flat));
    }
    std::cout << "wrote " << out << " (" << dg_n << " records)\n";
    return 0;
  }

  if (train_rm_cmd->parsed()) {
    auto flat = base_config(trm_opts, "train-rm");
    if (trm_preset == "paper") {
      const auto preset = RmConfig::paper_preset();
      if (!train_rm_cmd->count("--lr")) trm_cfg.lr = preset.lr;
      if (!train_rm_cmd->count("--warmup-steps")) trm_cfg.warmup_steps = preset.warmup_steps;
      trm_cfg.grad_accum = preset.grad_accum;
    } else if (trm_preset != "desk") {
      raise(ErrorCode::ConfigInvalid, "preset must be desk or paper");
    }
    trm_cfg.seed = trm_opts.seed;
    flat.set("lr", std::to_string(trm_cfg.lr));
    flat.set("epochs", std::to_string(trm_cfg.epochs));
    flat.set("batch_size", std::to_string(trm_cfg.batch_size));
    flat.set("hidden", std::to_string(trm_cfg.hidden));
    flat.set("preset", trm_preset);
    if (!trm_dim.empty()) flat.set("dim", trm_dim);

    const auto dataset = load_rm_dataset(resolved(trm_opts, trm_data));
    HeadStatistics stats;
    const MultiHeadRewardModel model =
        trm_dim.empty() ? train_rm(dataset, trm_cfg, &stats)
                        : train_single_head(dataset, parse_dim_arg(trm_dim), trm_cfg);

    const auto out = resolved(trm_opts, trm_out);
    ensure_parent(out);
    Checkpoint ckpt = model.to_checkpoint(dataset.vocab.hash());
    stamp_header(ckpt.header, hash_config(flat), !trm_opts.no_timestamp);
    save_checkpoint(ckpt, out);
    std::cout << "wrote " << out << "\n";
    if (!trm_stats_out.empty() && trm_dim.empty()) {
      const auto stats_path = resolved(trm_opts, trm_stats_out);
      ensure_parent(stats_path);
      stats.save(stats_path, hash_config(flat), !trm_opts.no_timestamp);
      std::cout << "wrote " << stats_path << "\n";
    }
    return 0;
  }

  if (eval_rm_cmd->parsed()) {
    auto flat = base_config(erm_opts, "eval-rm");
    const auto model = load_rm(resolved(erm_opts, erm_model));
    const auto dataset = load_rm_dataset(resolved(erm_opts, erm_data));
    check_scheme(model.scheme().id, dataset.scheme.id, "dataset");
    const auto eval = evaluate_rm(model, dataset, erm_opts.workers);
    json out = {{"preference_accuracy", eval.preference_accuracy},
                {"intensity_accuracy", eval.intensity_accuracy},
                {"samples", eval.samples},
                {"intensity_pairs", eval.intensity_pairs},
                {"config_hash", hash_config(flat)}};
    std::cout << out.dump(2) << "\n";
    if (!erm_out.empty()) {
      const auto path = resolved(erm_opts, erm_out);
      ensure_parent(path);
      write_file(path, out.dump(2) + "\n");
    }
    return 0;
  }

  if (calibrate_cmd->parsed()) {
    auto flat = base_config(cal_opts, "calibrate");
    flat.set("beta", std::to_string(cal_beta));
    const auto model = load_rm(resolved(cal_opts, cal_model));
    const auto dataset = load_rm_dataset(resolved(cal_opts, cal_data));
    check_scheme(model.scheme().id, dataset.scheme.id, "dataset");
    const auto stats = calibrate_stats(model, dataset, cal_beta);
    const auto out = resolved(cal_opts, cal_out);
    ensure_parent(out);
    stats.save(out, hash_config(flat), !cal_opts.no_timestamp);
    std::cout << "wrote " << out << "\n";
    return 0;
  }

  if (train_policy_cmd->parsed()) {
    auto flat = base_config(tp_opts, "train-policy");
    const Algo algo = algo_from_name(tp_algo);
    if (tp_preset != "desk" && tp_preset != "paper") {
      raise(ErrorCode::ConfigInvalid, "preset must be desk or paper");
    }
    AlgoConfig algo_cfg = tp_preset == "paper" ? AlgoConfig::paper_preset(algo)
                                               : AlgoConfig::defaults_for(algo);
    // File config first, then CLI flags override.
    if (!tp_opts.config_path.empty()) {
      const auto file_cfg = FlatConfig::load(tp_opts.config_path);
      algo_cfg.lr = file_cfg.get_double("lr", algo_cfg.lr);
      algo_cfg.kl_coef = file_cfg.get_double("kl_coef", algo_cfg.kl_coef);
      algo_cfg.batch_size = static_cast<int>(file_cfg.get_int("batch_size", algo_cfg.batch_size));
      algo_cfg.epochs = static_cast<int>(file_cfg.get_int("epochs", algo_cfg.epochs));
      algo_cfg.clip_eps = file_cfg.get_double("clip_eps", algo_cfg.clip_eps);
      algo_cfg.rloo_k = static_cast<int>(file_cfg.get_int("rloo_k", algo_cfg.rloo_k));
      algo_cfg.dpo_beta = file_cfg.get_double("dpo_beta", algo_cfg.dpo_beta);
      tp_cfg.steps = static_cast<int>(file_cfg.get_int("steps", tp_cfg.steps));
      tp_cfg.log_interval = static_cast<int>(file_cfg.get_int("log_interval", tp_cfg.log_interval));
      tp_cfg.max_len = static_cast<int>(file_cfg.get_int("max_len", tp_cfg.max_len));
      tp_cfg.temperature = file_cfg.get_double("temperature", tp_cfg.temperature);
    }
    if (tp_lr > 0) algo_cfg.lr = tp_lr;
    if (tp_kl >= 0) algo_cfg.kl_coef = tp_kl;
    if (tp_clip > 0) algo_cfg.clip_eps = tp_clip;
    if (tp_dpo_beta > 0) algo_cfg.dpo_beta = tp_dpo_beta;
    if (tp_batch > 0) algo_cfg.batch_size = tp_batch;
    if (tp_rloo_k > 0) algo_cfg.rloo_k = tp_rloo_k;
    if (tp_epochs > 0) algo_cfg.epochs = tp_epochs;
    if (!tp_weights.empty()) algo_cfg.weights = parse_weights(tp_weights);

    flat.set("algo", tp_algo);
    flat.set("lr", std::to_string(algo_cfg.lr));
    flat.set("kl_coef", std::to_string(algo_cfg.kl_coef));
    flat.set("batch_size", std::to_string(algo_cfg.batch_size));
    flat.set("steps", std::to_string(tp_cfg.steps));
    flat.set("preset", tp_preset);

    const auto prompts = load_rl_dataset(resolved(tp_opts, tp_prompts));

    RewardSource source;
    MultiHeadRewardModel rm_storage;
    HeadStatistics stats_storage;
    std::vector<MultiHeadRewardModel> scalar_storage;
    if (algo == Algo::Morlhf) {
      const auto paths = parse_paths(tp_scalar_rms);
      if (paths.empty()) raise(ErrorCode::ConfigInvalid, "morlhf requires --scalar-rms");
      if (algo_cfg.weights.empty()) raise(ErrorCode::ConfigInvalid, "morlhf requires --weights");
      scalar_storage.reserve(paths.size());
      for (const auto& path : paths) {
        scalar_storage.push_back(load_rm(resolved(tp_opts, path)));
        check_scheme(prompts.scheme.id, scalar_storage.back().scheme().id, path);
      }
      for (const auto& model : scalar_storage) source.scalar_rms.push_back(&model);
    } else {
      if (tp_rm.empty() || tp_stats.empty()) {
        raise(ErrorCode::NotCalibrated, "train-policy needs --rm and --stats");
      }
      rm_storage = load_rm(resolved(tp_opts, tp_rm));
      stats_storage = HeadStatistics::load(resolved(tp_opts, tp_stats));
      check_scheme(prompts.scheme.id, rm_storage.scheme().id, "reward model");
      check_scheme(prompts.scheme.id, stats_storage.scheme().id, "statistics");
      source.rm = &rm_storage;
      source.stats = &stats_storage;
    }

    tp_cfg.algo = algo_cfg;
    tp_cfg.seed = tp_opts.seed;
    tp_cfg.workers = tp_opts.workers;
    tp_cfg.with_timestamp = !tp_opts.no_timestamp;
    tp_cfg.config_hash = hash_config(flat);
    tp_cfg.checkpoint_path = resolved(tp_opts, tp_out);
    ensure_parent(tp_cfg.checkpoint_path);
    if (!tp_metrics.empty()) {
      tp_cfg.metrics_path = resolved(tp_opts, tp_metrics);
      ensure_parent(tp_cfg.metrics_path);
    }

    PolicyModel policy = tp_init_from.empty()
                             ? PolicyModel(prompts.scheme, vocab.size(), tp_embed,
                                           derive_seed(tp_opts.seed, 0x1717ULL))
                             : load_policy(resolved(tp_opts, tp_init_from));
    const auto summary = run_training(tp_cfg, prompts, source, std::move(policy), vocab);
    std::cout << "trained " << tp_algo << " for " << tp_cfg.steps << " steps; mean reward "
              << summary.step0_mean_reward << " -> " << summary.final_mean_reward << "\n"
              << "rm invocations " << summary.rm_invocations << ", tagged inputs "
              << summary.rm_tag_violations << "\n"
              << "wrote " << tp_cfg.checkpoint_path << "\n";
    return 0;
  }

  if (merge_cmd->parsed()) {
    const auto paths = parse_paths(merge_inputs);
    const auto lambdas = parse_weights(merge_lambdas);
    std::vector<PolicyModel> policies;
    policies.reserve(paths.size());
    for (const auto& path : paths) policies.push_back(load_policy(resolved(merge_opts, path)));
    const auto merged = merge_policies(policies, lambdas, merge_allow_unnormalized);
    auto flat = base_config(merge_opts, "merge");
    flat.set("lambdas", merge_lambdas);
    Checkpoint ckpt = merged.to_checkpoint(vocab.hash());
    stamp_header(ckpt.header, hash_config(flat), !merge_opts.no_timestamp);
    const auto out = resolved(merge_opts, merge_out);
    ensure_parent(out);
    save_checkpoint(ckpt, out);
    std::cout << "wrote " << out << "\n";
    return 0;
  }

  if (sweep_cmd->parsed()) {
    const auto policy = load_policy(resolved(sweep_opts, sweep_policy));
    const auto scheme = DataTypeScheme::from_id(sweep_scheme);
    check_scheme(scheme.id, policy.scheme().id, "policy");
    BenchConfig bench_cfg;
    bench_cfg.workers = sweep_opts.workers;
    const auto result = intensity_sweep(policy, parse_dim_arg(sweep_dim), scheme, sweep_samples,
                                        sweep_opts.seed, vocab, bench_cfg);
    const auto paths = report({result}, {}, resolved(sweep_opts, sweep_out_dir));
    for (const auto& path : paths.files) std::cout << "wrote " << path << "\n";
    return 0;
  }

  if (pairing_cmd->parsed()) {
    const auto policy = load_policy(resolved(pair_opts, pair_policy));
    const auto scheme = DataTypeScheme::from_id(pair_scheme);
    check_scheme(scheme.id, policy.scheme().id, "policy");
    BenchConfig bench_cfg;
    bench_cfg.workers = pair_opts.workers;
    const auto results =
        pairing_eval(policy, scheme, pair_samples, pair_opts.seed, vocab, bench_cfg);
    const auto paths = report({}, results, resolved(pair_opts, pair_out_dir));
    for (const auto& path : paths.files) std::cout << "wrote " << path << "\n";
    return 0;
  }

  if (report_cmd->parsed()) {
    std::vector<SweepResult> sweeps;
    for (const auto& path : parse_paths(report_sweeps)) {
      sweeps.push_back(sweep_from_csv(read_file(resolved(report_opts, path))));
    }
    std::vector<PairingResult> pairings;
    if (!report_pairing.empty()) {
      pairings = pairing_from_csv(read_file(resolved(report_opts, report_pairing)));
    }
    const auto paths = report(sweeps, pairings, resolved(report_opts, report_out));
    for (const auto& path : paths.files) std::cout << "wrote " << path << "\n";
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
