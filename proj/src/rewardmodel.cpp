#include "moslim/rewardmodel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "moslim/optimizer.hpp"
#include "moslim/rng.hpp"
#include "moslim/util.hpp"

namespace moslim {

using nlohmann::json;

namespace {

void softmax_inplace(std::span<double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (auto& v : z) {
    v = std::exp(v - zmax);
    total += v;
  }
  for (auto& v : z) v /= total;
}

constexpr double kLogFloor = 1e-300;

}  // namespace

// ---------------------------------------------------------------------------
// HeadStatistics

HeadStatistics::HeadStatistics(const DataTypeScheme& scheme, std::vector<Dimension> dims, double beta)
    : scheme_(scheme), dims_(std::move(dims)), beta_(beta) {
  cells_.resize(dims_.size());
  for (std::size_t h = 0; h < dims_.size(); ++h) {
    cells_[h].resize(static_cast<std::size_t>(scheme_.level_count(dims_[h])));
  }
}

const HeadStatistics::Cell& HeadStatistics::cell(Dimension dim, int cls) const {
  for (std::size_t h = 0; h < dims_.size(); ++h) {
    if (dims_[h] != dim) continue;
    if (cls < 0 || cls >= static_cast<int>(cells_[h].size())) {
      raise(ErrorCode::IntensityOutOfRange, "class index " + std::to_string(cls));
    }
    return cells_[h][static_cast<std::size_t>(cls)];
  }
  raise(ErrorCode::SchemeMismatch, std::string("no tracked head for ") + tag_name(dim));
}

HeadStatistics::Cell& HeadStatistics::cell(Dimension dim, int cls) {
  return const_cast<Cell&>(static_cast<const HeadStatistics*>(this)->cell(dim, cls));
}

void HeadStatistics::update(Dimension dim, int cls, double p) {
  Cell& c = cell(dim, cls);
  c.ema_mean = beta_ * c.ema_mean + (1.0 - beta_) * p;
  c.ema_sqmean = beta_ * c.ema_sqmean + (1.0 - beta_) * p * p;
  ++c.count;
}

bool HeadStatistics::calibrated(Dimension dim, int cls) const { return cell(dim, cls).count > 0; }

double HeadStatistics::mean(Dimension dim, int cls) const {
  const Cell& c = cell(dim, cls);
  if (c.count == 0) {
    raise(ErrorCode::NotCalibrated,
          std::string(tag_name(dim)) + "." + std::to_string(cls + 1) + " has no observations");
  }
  return c.ema_mean;
}

double HeadStatistics::stddev(Dimension dim, int cls) const {
  const Cell& c = cell(dim, cls);
  if (c.count == 0) {
    raise(ErrorCode::NotCalibrated,
          std::string(tag_name(dim)) + "." + std::to_string(cls + 1) + " has no observations");
  }
  const double var = c.ema_sqmean - c.ema_mean * c.ema_mean;
  return std::sqrt(std::max(var, kStdFloor * kStdFloor));
}

std::uint64_t HeadStatistics::count(Dimension dim, int cls) const { return cell(dim, cls).count; }

json HeadStatistics::to_json(const std::string& config_hash, bool with_timestamp) const {
  json j = json::object();
  json header = {{"kind", "head_statistics"},
                 {"scheme", scheme_.id},
                 {"beta", beta_},
                 {"dims", json::array()}};
  for (Dimension dim : dims_) header["dims"].push_back(tag_name(dim));
  stamp_header(header, config_hash, with_timestamp);
  j["_header"] = header;
  for (std::size_t h = 0; h < dims_.size(); ++h) {
    for (std::size_t cls = 0; cls < cells_[h].size(); ++cls) {
      const Cell& c = cells_[h][cls];
      const std::string key = std::string(tag_name(dims_[h])) + "." + std::to_string(cls + 1);
      j[key] = {{"mean", c.ema_mean}, {"sqmean", c.ema_sqmean}, {"count", c.count}};
    }
  }
  return j;
}

HeadStatistics HeadStatistics::from_json(const json& j) {
  const json& header = j.at("_header");
  std::vector<Dimension> dims;
  for (const auto& name : header.at("dims")) {
    const auto dim = dimension_from_tag_name(name.get<std::string>());
    if (!dim) raise(ErrorCode::IoFailure, "unknown dimension in stats file");
    dims.push_back(*dim);
  }
  HeadStatistics stats(DataTypeScheme::from_id(header.at("scheme").get<int>()), dims,
                       header.at("beta").get<double>());
  for (std::size_t h = 0; h < stats.dims_.size(); ++h) {
    for (std::size_t cls = 0; cls < stats.cells_[h].size(); ++cls) {
      const std::string key =
          std::string(tag_name(stats.dims_[h])) + "." + std::to_string(cls + 1);
      const json& cell_json = j.at(key);
      Cell& c = stats.cells_[h][cls];
      c.ema_mean = cell_json.at("mean").get<double>();
      c.ema_sqmean = cell_json.at("sqmean").get<double>();
      c.count = cell_json.at("count").get<std::uint64_t>();
    }
  }
  return stats;
}

void HeadStatistics::save(const std::string& path, const std::string& config_hash,
                          bool with_timestamp) const {
  write_file(path, to_json(config_hash, with_timestamp).dump(2) + "\n");
}

HeadStatistics HeadStatistics::load(const std::string& path) {
  return from_json(json::parse(read_file(path)));
}

// ---------------------------------------------------------------------------
// MultiHeadRewardModel

RmConfig RmConfig::paper_preset() {
  RmConfig cfg;
  cfg.lr = 1e-6;
  cfg.warmup_steps = 500;
  cfg.grad_accum = 4;
  return cfg;
}

MultiHeadRewardModel::MultiHeadRewardModel(DataTypeScheme scheme, std::vector<Dimension> dims,
                                           int vocab_size, int hidden, std::uint64_t seed)
    : scheme_(scheme), dims_(std::move(dims)), vocab_size_(vocab_size), hidden_(hidden), seed_(seed) {
  if (dims_.empty()) raise(ErrorCode::InvalidArgument, "reward model needs at least one head");
  if (vocab_size_ < 1) raise(ErrorCode::InvalidArgument, "vocab size must be positive");
  if (hidden_ < 0) raise(ErrorCode::InvalidArgument, "hidden width must be >= 0");
  params_.assign(param_count(), 0.0);
  if (hidden_ > 0) {
    Rng rng(derive_seed(seed, 0x524d31ULL));
    const double scale = 1.0 / std::sqrt(static_cast<double>(vocab_size_));
    for (std::size_t i = 0; i < b1_off() + static_cast<std::size_t>(hidden_); ++i) {
      params_[i] = scale * rng.normal();
    }
  }
}

void MultiHeadRewardModel::randomize(std::uint64_t seed, double scale) {
  Rng rng(seed);
  for (auto& p : params_) p = scale * rng.normal();
}

int MultiHeadRewardModel::head_index(Dimension dim) const {
  for (std::size_t h = 0; h < dims_.size(); ++h) {
    if (dims_[h] == dim) return static_cast<int>(h);
  }
  return -1;
}

std::size_t MultiHeadRewardModel::head_off(int head) const {
  std::size_t off = hidden_ > 0 ? b1_off() + static_cast<std::size_t>(hidden_) : 0;
  const auto f = static_cast<std::size_t>(feature_dim());
  for (int h = 0; h < head; ++h) {
    off += static_cast<std::size_t>(head_levels(h)) * (f + 1);
  }
  return off;
}

std::size_t MultiHeadRewardModel::param_count() const {
  return head_off(head_count());
}

std::vector<double> MultiHeadRewardModel::featurize(std::span<const int> q, std::span<const int> a,
                                                    const Vocabulary& vocab) {
  if (a.empty()) raise(ErrorCode::InvalidArgument, "answer must be non-empty");
  vocab.check(q);
  vocab.check(a);
  std::vector<double> x(static_cast<std::size_t>(vocab.size()), 0.0);
  for (int id : q) x[static_cast<std::size_t>(id)] += 1.0;
  for (int id : a) x[static_cast<std::size_t>(id)] += 1.0;
  return x;
}

std::vector<double> MultiHeadRewardModel::hidden_features(std::span<const double> x) const {
  if (hidden_ == 0) return std::vector<double>(x.begin(), x.end());
  std::vector<double> h(static_cast<std::size_t>(hidden_));
  const double* w1 = params_.data() + w1_off();
  const double* b1 = params_.data() + b1_off();
  for (int i = 0; i < hidden_; ++i) {
    double acc = b1[i];
    const double* row = w1 + static_cast<std::size_t>(i) * vocab_size_;
    for (int j = 0; j < vocab_size_; ++j) acc += row[j] * x[static_cast<std::size_t>(j)];
    h[static_cast<std::size_t>(i)] = std::tanh(acc);
  }
  return h;
}

void MultiHeadRewardModel::head_logits(int head, std::span<const double> features,
                                       std::span<double> z) const {
  const int levels = head_levels(head);
  const auto f = static_cast<std::size_t>(feature_dim());
  const double* w = params_.data() + head_off(head);
  const double* b = w + static_cast<std::size_t>(levels) * f;
  for (int c = 0; c < levels; ++c) {
    double acc = b[c];
    const double* row = w + static_cast<std::size_t>(c) * f;
    for (std::size_t j = 0; j < f; ++j) acc += row[j] * features[j];
    z[static_cast<std::size_t>(c)] = acc;
  }
}

HeadDistribution MultiHeadRewardModel::forward(std::span<const int> q, std::span<const int> a,
                                               const Vocabulary& vocab) const {
  if (vocab.size() != vocab_size_) {
    raise(ErrorCode::SchemeMismatch, "vocabulary size differs from model");
  }
  const auto x = featurize(q, a, vocab);
  const auto features = hidden_features(x);
  HeadDistribution dist;
  dist.dims = dims_;
  dist.probs.resize(dims_.size());
  for (int h = 0; h < head_count(); ++h) {
    auto& row = dist.probs[static_cast<std::size_t>(h)];
    row.resize(static_cast<std::size_t>(head_levels(h)));
    head_logits(h, features, row);
    softmax_inplace(row);
  }
  return dist;
}

double MultiHeadRewardModel::head_loss(std::span<const double> probs,
                                       std::span<const std::uint8_t> one_hot) {
  if (probs.size() != one_hot.size()) {
    raise(ErrorCode::ShapeMismatch, "probability and label lengths differ");
  }
  int hot = -1;
  for (std::size_t j = 0; j < one_hot.size(); ++j) {
    if (one_hot[j] == 0) continue;
    if (one_hot[j] != 1 || hot >= 0) raise(ErrorCode::NotOneHot, "label is not one-hot");
    hot = static_cast<int>(j);
  }
  if (hot < 0) raise(ErrorCode::NotOneHot, "label has no hot bit");
  return -std::log(std::max(probs[static_cast<std::size_t>(hot)], kLogFloor));
}

namespace {

struct SampleForward {
  std::vector<double> x;                      // bag features
  std::vector<double> features;               // post-hidden features
  std::vector<std::vector<double>> probs;     // per head
  std::vector<int> hot;                       // labeled class per head, -1 otherwise
};

}  // namespace

// Shared forward pass + loss for a batch; backprop is done inline in
// total_loss_grad to keep gradients exact.
struct RmBackprop {
  const MultiHeadRewardModel& model;

  SampleForward run(const LabeledSample& s) const {
    const auto& scheme = model.scheme_;
    if (static_cast<int>(s.label.size()) != scheme.label_width()) {
      raise(ErrorCode::SchemeMismatch, "label width differs from model scheme");
    }
    SampleForward f;
    f.x.assign(static_cast<std::size_t>(model.vocab_size_), 0.0);
    for (int id : s.question) {
      if (id < 0 || id >= model.vocab_size_) raise(ErrorCode::UnknownToken, "question token");
      f.x[static_cast<std::size_t>(id)] += 1.0;
    }
    for (int id : s.answer) {
      if (id < 0 || id >= model.vocab_size_) raise(ErrorCode::UnknownToken, "answer token");
      f.x[static_cast<std::size_t>(id)] += 1.0;
    }
    f.features = model.hidden_features(f.x);
    f.probs.resize(static_cast<std::size_t>(model.head_count()));
    f.hot.assign(static_cast<std::size_t>(model.head_count()), -1);
    for (int h = 0; h < model.head_count(); ++h) {
      const Dimension dim = model.dims_[static_cast<std::size_t>(h)];
      auto& row = f.probs[static_cast<std::size_t>(h)];
      row.resize(static_cast<std::size_t>(model.head_levels(h)));
      model.head_logits(h, f.features, row);
      softmax_inplace(row);
      const int off = scheme.block_offset(dim);
      int hot = -1;
      for (int j = 0; j < model.head_levels(h); ++j) {
        if (s.label[static_cast<std::size_t>(off + j)]) {
          if (hot >= 0) raise(ErrorCode::NotOneHot, "label block has multiple hot bits");
          hot = j;
        }
      }
      f.hot[static_cast<std::size_t>(h)] = hot;
    }
    return f;
  }

  // Loss contribution of one sample; masked heads contribute nothing.
  double loss(const SampleForward& f) const {
    double total = 0.0;
    for (int h = 0; h < model.head_count(); ++h) {
      const int hot = f.hot[static_cast<std::size_t>(h)];
      if (hot < 0 || model.head_levels(h) < 2) continue;
      total += -std::log(std::max(f.probs[static_cast<std::size_t>(h)][static_cast<std::size_t>(hot)],
                                  kLogFloor));
    }
    return total;
  }

  // Accumulates `weight` * d(sample loss)/d(params) into grad.
  void accumulate(const SampleForward& f, double weight, std::vector<double>& grad) const {
    const auto fdim = static_cast<std::size_t>(model.feature_dim());
    std::vector<double> dfeat(fdim, 0.0);
    bool any = false;
    for (int h = 0; h < model.head_count(); ++h) {
      const int hot = f.hot[static_cast<std::size_t>(h)];
      const int levels = model.head_levels(h);
      if (hot < 0 || levels < 2) continue;
      any = true;
      const auto& probs = f.probs[static_cast<std::size_t>(h)];
      const std::size_t off = model.head_off(h);
      double* gw = grad.data() + off;
      double* gb = gw + static_cast<std::size_t>(levels) * fdim;
      const double* w = model.params_.data() + off;
      for (int c = 0; c < levels; ++c) {
        // d(CE)/dz_c = S_c - 1[c == hot]
        const double dz = (probs[static_cast<std::size_t>(c)] - (c == hot ? 1.0 : 0.0)) * weight;
        gb[c] += dz;
        double* grow = gw + static_cast<std::size_t>(c) * fdim;
        const double* wrow = w + static_cast<std::size_t>(c) * fdim;
        for (std::size_t j = 0; j < fdim; ++j) {
          grow[j] += dz * f.features[j];
          dfeat[j] += dz * wrow[j];
        }
      }
    }
    if (!any || model.hidden_ == 0) return;
    // Through tanh hidden layer.
    double* gw1 = grad.data() + model.w1_off();
    double* gb1 = grad.data() + model.b1_off();
    for (int i = 0; i < model.hidden_; ++i) {
      const double hval = f.features[static_cast<std::size_t>(i)];
      const double du = dfeat[static_cast<std::size_t>(i)] * (1.0 - hval * hval);
      gb1[i] += du;
      double* grow = gw1 + static_cast<std::size_t>(i) * model.vocab_size_;
      for (int j = 0; j < model.vocab_size_; ++j) {
        grow[j] += du * f.x[static_cast<std::size_t>(j)];
      }
    }
  }
};

double MultiHeadRewardModel::total_loss(std::span<const LabeledSample> batch) const {
  if (batch.empty()) raise(ErrorCode::EmptyBatch, "total_loss on empty batch");
  const RmBackprop bp{*this};
  double total = 0.0;
  for (const auto& s : batch) total += bp.loss(bp.run(s));
  return total / static_cast<double>(batch.size());
}

double MultiHeadRewardModel::total_loss_grad(std::span<const LabeledSample> batch,
                                             std::vector<double>& grad,
                                             HeadStatistics* stats) const {
  if (batch.empty()) raise(ErrorCode::EmptyBatch, "total_loss_grad on empty batch");
  grad.assign(params_.size(), 0.0);
  const RmBackprop bp{*this};
  const double weight = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& s : batch) {
    const auto f = bp.run(s);
    total += bp.loss(f);
    bp.accumulate(f, weight, grad);
    if (stats) {
      for (int h = 0; h < head_count(); ++h) {
        const int hot = f.hot[static_cast<std::size_t>(h)];
        if (hot < 0) continue;
        stats->update(dims_[static_cast<std::size_t>(h)], hot,
                      f.probs[static_cast<std::size_t>(h)][static_cast<std::size_t>(hot)]);
      }
    }
  }
  return total * weight;
}

Checkpoint MultiHeadRewardModel::to_checkpoint(std::uint64_t vocab_hash) const {
  json dims_json = json::array();
  for (Dimension dim : dims_) dims_json.push_back(tag_name(dim));
  Checkpoint ckpt;
  ckpt.header = {{"kind", "reward_model"}, {"scheme", scheme_.id}, {"dims", dims_json},
                 {"v", vocab_size_},       {"h", hidden_},         {"f", feature_dim()},
                 {"seed", seed_},          {"vocab_hash", to_hex(vocab_hash)}};
  ckpt.params.assign(params_.begin(), params_.end());
  return ckpt;
}

MultiHeadRewardModel MultiHeadRewardModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.header.at("kind").get<std::string>() != "reward_model") {
    raise(ErrorCode::IoFailure, "checkpoint is not a reward model");
  }
  std::vector<Dimension> dims;
  for (const auto& name : ckpt.header.at("dims")) {
    const auto dim = dimension_from_tag_name(name.get<std::string>());
    if (!dim) raise(ErrorCode::IoFailure, "unknown dimension in checkpoint");
    dims.push_back(*dim);
  }
  MultiHeadRewardModel model(DataTypeScheme::from_id(ckpt.header.at("scheme").get<int>()), dims,
                             ckpt.header.at("v").get<int>(), ckpt.header.at("h").get<int>(),
                             ckpt.header.at("seed").get<std::uint64_t>());
  if (ckpt.params.size() != model.params_.size()) {
    raise(ErrorCode::IoFailure, "parameter count mismatch in checkpoint");
  }
  model.params_ = ckpt.params;
  return model;
}

// ---------------------------------------------------------------------------
// Training / evaluation / calibration

MultiHeadRewardModel train_rm(const RmDataset& dataset, const RmConfig& cfg,
                              HeadStatistics* stats_out, RmTrainReport* report) {
  if (dataset.samples.empty()) raise(ErrorCode::EmptyDataset, "train_rm needs samples");
  if (cfg.batch_size < 1 || cfg.epochs < 1 || cfg.grad_accum < 1) {
    raise(ErrorCode::ConfigInvalid, "batch_size, epochs and grad_accum must be >= 1");
  }
  MultiHeadRewardModel model(dataset.scheme,
                             {Dimension::Helpfulness, Dimension::Honesty, Dimension::Harmlessness},
                             dataset.vocab.size(), cfg.hidden, cfg.seed);
  if (stats_out) {
    *stats_out = HeadStatistics(dataset.scheme, model.dims(), cfg.stats_beta);
  }

  AdamW opt;
  opt.lr = cfg.lr;
  opt.weight_decay = cfg.weight_decay;
  opt.reset(model.params().size());

  std::vector<std::size_t> order(dataset.samples.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> grad, accum;
  std::vector<LabeledSample> batch;
  std::int64_t step = 0;
  int accum_count = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, 0xe0000ULL + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(cfg.batch_size)) {
      batch.clear();
      const std::size_t end = std::min(order.size(), pos + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t i = pos; i < end; ++i) batch.push_back(dataset.samples[order[i]]);
      const double loss = model.total_loss_grad(batch, grad, stats_out);
      if (report) report->step_loss.push_back(loss);
      if (cfg.grad_accum == 1) {
        opt.step(model.mutable_params(), grad, warmup_scale(step, cfg.warmup_steps));
        ++step;
      } else {
        if (accum.empty()) accum.assign(grad.size(), 0.0);
        for (std::size_t i = 0; i < grad.size(); ++i) accum[i] += grad[i] / cfg.grad_accum;
        if (++accum_count == cfg.grad_accum) {
          opt.step(model.mutable_params(), accum, warmup_scale(step, cfg.warmup_steps));
          accum.assign(accum.size(), 0.0);
          accum_count = 0;
          ++step;
        }
      }
    }
  }
  return model;
}

RmEvaluation evaluate_rm(const MultiHeadRewardModel& model, const RmDataset& dataset, int workers) {
  if (dataset.samples.empty()) raise(ErrorCode::EmptyDataset, "evaluate_rm needs samples");
  if (dataset.scheme != model.scheme()) {
    raise(ErrorCode::SchemeMismatch, "dataset scheme differs from model");
  }
  const std::size_t n = dataset.samples.size();
  std::atomic<std::size_t> pref_correct{0}, pref_total{0};
  std::atomic<std::size_t> int_correct{0}, int_total{0};
  parallel_for(n, workers, [&](std::size_t i) {
    const auto& s = dataset.samples[i];
    const auto dist = model.forward(s.question, s.answer, dataset.vocab);
    bool any_head = false;
    bool all_confident = true;
    for (int h = 0; h < model.head_count(); ++h) {
      const Dimension dim = model.dims()[static_cast<std::size_t>(h)];
      if (!s.dim_labeled(dim, dataset.scheme)) continue;
      any_head = true;
      const auto& probs = dist.probs[static_cast<std::size_t>(h)];
      const int levels = static_cast<int>(probs.size());
      const int cls = s.label_class(dim, dataset.scheme);
      const auto argmax =
          static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
      int_total.fetch_add(1);
      if (argmax == cls) int_correct.fetch_add(1);
      const double maxp = probs[static_cast<std::size_t>(argmax)];
      if (levels > 1 && maxp <= 1.0 / levels) all_confident = false;
    }
    if (any_head) {
      pref_total.fetch_add(1);
      if (all_confident) pref_correct.fetch_add(1);
    }
  });
  RmEvaluation eval;
  eval.samples = pref_total.load();
  eval.intensity_pairs = int_total.load();
  eval.preference_accuracy =
      eval.samples ? static_cast<double>(pref_correct.load()) / eval.samples : 0.0;
  eval.intensity_accuracy =
      eval.intensity_pairs ? static_cast<double>(int_correct.load()) / eval.intensity_pairs : 0.0;
  return eval;
}

HeadStatistics calibrate_stats(const MultiHeadRewardModel& model, const RmDataset& dataset,
                               double beta) {
  if (dataset.samples.empty()) raise(ErrorCode::EmptyDataset, "calibrate_stats needs samples");
  if (dataset.scheme != model.scheme()) {
    raise(ErrorCode::SchemeMismatch, "dataset scheme differs from model");
  }
  HeadStatistics stats(dataset.scheme, model.dims(), beta);
  for (const auto& s : dataset.samples) {
    const auto dist = model.forward(s.question, s.answer, dataset.vocab);
    for (int h = 0; h < model.head_count(); ++h) {
      const Dimension dim = model.dims()[static_cast<std::size_t>(h)];
      if (!s.dim_labeled(dim, dataset.scheme)) continue;
      const int cls = s.label_class(dim, dataset.scheme);
      stats.update(dim, cls, dist.probs[static_cast<std::size_t>(h)][static_cast<std::size_t>(cls)]);
    }
  }
  return stats;
}

double scalar_reward(const MultiHeadRewardModel& model, Dimension dim, std::span<const int> q,
                     std::span<const int> a, const Vocabulary& vocab) {
  const int head = model.head_index(dim);
  if (head < 0) raise(ErrorCode::SchemeMismatch, std::string("model has no head for ") + tag_name(dim));
  const auto dist = model.forward(q, a, vocab);
  const auto& probs = dist.probs[static_cast<std::size_t>(head)];
  const int levels = static_cast<int>(probs.size());
  if (levels == 1) return 0.5;
  double expected = 0.0;
  for (int c = 0; c < levels; ++c) expected += (c + 1) * probs[static_cast<std::size_t>(c)];
  return (expected - 1.0) / (levels - 1);
}

}  // namespace moslim
