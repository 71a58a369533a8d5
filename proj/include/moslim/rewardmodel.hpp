#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "moslim/checkpoint.hpp"
#include "moslim/datagen.hpp"
#include "moslim/prefgrammar.hpp"
#include "moslim/synthenv.hpp"

namespace moslim {

/// Per-head softmax outputs for one (question, answer) pair.
struct HeadDistribution {
  std::vector<Dimension> dims;
  std::vector<std::vector<double>> probs;  // probs[h][class], one row per head

  const std::vector<double>* find(Dimension dim) const {
    for (std::size_t h = 0; h < dims.size(); ++h) {
      if (dims[h] == dim) return &probs[h];
    }
    return nullptr;
  }
};

/// Exponential moving mean/second-moment of the predicted target-class
/// probability, kept per (head, intensity class). The derived standard
/// deviation is floored at 1e-6.
class HeadStatistics {
 public:
  static constexpr double kStdFloor = 1e-6;

  HeadStatistics() = default;
  HeadStatistics(const DataTypeScheme& scheme, std::vector<Dimension> dims, double beta = 0.99);

  void update(Dimension dim, int cls, double p);

  bool calibrated(Dimension dim, int cls) const;
  double mean(Dimension dim, int cls) const;
  double stddev(Dimension dim, int cls) const;
  std::uint64_t count(Dimension dim, int cls) const;
  double beta() const { return beta_; }
  const std::vector<Dimension>& dims() const { return dims_; }
  const DataTypeScheme& scheme() const { return scheme_; }

  /// JSON map "head.class" -> {mean, sqmean, count} plus a "_header" entry.
  nlohmann::json to_json(const std::string& config_hash, bool with_timestamp) const;
  static HeadStatistics from_json(const nlohmann::json& j);
  void save(const std::string& path, const std::string& config_hash, bool with_timestamp) const;
  static HeadStatistics load(const std::string& path);

 private:
  struct Cell {
    double ema_mean = 0.0;
    double ema_sqmean = 0.0;
    std::uint64_t count = 0;
  };

  const Cell& cell(Dimension dim, int cls) const;
  Cell& cell(Dimension dim, int cls);

  DataTypeScheme scheme_;
  std::vector<Dimension> dims_;
  double beta_ = 0.99;
  std::vector<std::vector<Cell>> cells_;  // [head][class]
};

struct RmConfig {
  double lr = 1e-3;
  int epochs = 1;
  int batch_size = 32;
  double weight_decay = 0.01;
  int warmup_steps = 50;
  int grad_accum = 1;
  int hidden = 0;  // 0 = linear heads on bag-of-token counts
  double stats_beta = 0.99;
  std::uint64_t seed = 0;

  /// Hyperparameters used for the full-scale classifier runs; kept as a
  /// named preset (lr 1e-6, warmup 500, grad accumulation 4).
  static RmConfig paper_preset();
};

/// Multi-head classification reward model: a shared bag-of-tokens featurizer
/// (optionally one affine+tanh hidden layer) feeding one softmax
/// classification head per preference dimension.
class MultiHeadRewardModel {
 public:
  MultiHeadRewardModel() = default;

  /// Heads start at zero so every head predicts the uniform distribution;
  /// the hidden layer (when present) is randomly initialized, otherwise
  /// gradients could not reach it.
  MultiHeadRewardModel(DataTypeScheme scheme, std::vector<Dimension> dims, int vocab_size,
                       int hidden, std::uint64_t seed);

  /// Fills every parameter with scale * N(0,1); for gradient tests.
  void randomize(std::uint64_t seed, double scale);

  int feature_dim() const { return hidden_ > 0 ? hidden_ : vocab_size_; }
  int head_count() const { return static_cast<int>(dims_.size()); }
  int head_index(Dimension dim) const;
  int head_levels(int head) const { return scheme_.level_count(dims_[static_cast<std::size_t>(head)]); }

  /// Softmax output of every head for the (question, answer) pair.
  HeadDistribution forward(std::span<const int> q, std::span<const int> a,
                           const Vocabulary& vocab) const;

  /// Cross-entropy of one head's softmax output against a one-hot label.
  static double head_loss(std::span<const double> probs, std::span<const std::uint8_t> one_hot);

  /// Mean over the batch of the masked per-head cross-entropy sum. Heads
  /// with an all-zero label block and single-class heads contribute nothing
  /// (and receive exactly zero gradient).
  double total_loss(std::span<const LabeledSample> batch) const;

  /// Same contract; also accumulates d(loss)/d(params) into `grad` (resized
  /// and zeroed) and optionally streams (head, labeled class) probabilities
  /// into `stats`.
  double total_loss_grad(std::span<const LabeledSample> batch, std::vector<double>& grad,
                         HeadStatistics* stats = nullptr) const;

  const DataTypeScheme& scheme() const { return scheme_; }
  const std::vector<Dimension>& dims() const { return dims_; }
  int vocab_size() const { return vocab_size_; }
  int hidden() const { return hidden_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const double> params() const { return params_; }
  std::span<double> mutable_params() { return params_; }

  Checkpoint to_checkpoint(std::uint64_t vocab_hash) const;
  static MultiHeadRewardModel from_checkpoint(const Checkpoint& ckpt);

  /// Bag-of-token counts over q ++ a.
  static std::vector<double> featurize(std::span<const int> q, std::span<const int> a,
                                       const Vocabulary& vocab);

 private:
  friend struct RmBackprop;

  DataTypeScheme scheme_;
  std::vector<Dimension> dims_;
  int vocab_size_ = 0;
  int hidden_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> params_;

  // Flat layout: [W1 (hidden x V), b1 (hidden)] when hidden > 0, then per
  // head in dims_ order [W (levels x F), b (levels)].
  std::size_t w1_off() const { return 0; }
  std::size_t b1_off() const { return static_cast<std::size_t>(hidden_) * vocab_size_; }
  std::size_t head_off(int head) const;
  std::size_t param_count() const;

  std::vector<double> hidden_features(std::span<const double> x) const;
  void head_logits(int head, std::span<const double> features, std::span<double> z) const;
};

struct RmTrainReport {
  std::vector<double> step_loss;
};

/// Minibatch AdamW training with linear warmup; deterministic per seed.
/// Statistics for every (head, labeled class) pair are tracked each step
/// when `stats_out` is given.
MultiHeadRewardModel train_rm(const RmDataset& dataset, const RmConfig& cfg,
                              HeadStatistics* stats_out = nullptr,
                              RmTrainReport* report = nullptr);

struct RmEvaluation {
  double preference_accuracy = 0.0;
  double intensity_accuracy = 0.0;
  std::size_t samples = 0;
  std::size_t intensity_pairs = 0;
};

/// intensity: fraction of (sample, labeled head) pairs whose argmax matches
/// the label. preference: fraction of samples where every labeled head
/// clears the 1/levels confidence floor (single-class heads always do).
RmEvaluation evaluate_rm(const MultiHeadRewardModel& model, const RmDataset& dataset,
                         int workers = 1);

/// Full deterministic pass over the dataset with a frozen model.
HeadStatistics calibrate_stats(const MultiHeadRewardModel& model, const RmDataset& dataset,
                               double beta = 0.99);

/// Per-dimension scalar reward for the weighted-sum baseline: expected
/// intensity under the head's softmax, min-max normalized to [0,1] by the
/// level range (single-level heads yield the neutral 0.5).
double scalar_reward(const MultiHeadRewardModel& model, Dimension dim, std::span<const int> q,
                     std::span<const int> a, const Vocabulary& vocab);

}  // namespace moslim
