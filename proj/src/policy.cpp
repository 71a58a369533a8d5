#include "moslim/policy.hpp"

#include <algorithm>
#include <cmath>

#include "moslim/rng.hpp"
#include "moslim/util.hpp"

namespace moslim {

using nlohmann::json;

double Trajectory::logprob_sum() const {
  double total = 0.0;
  for (double lp : logprobs) total += lp;
  return total;
}

double Trajectory::ref_logprob_sum() const {
  double total = 0.0;
  for (double lp : ref_logprobs) total += lp;
  return total;
}

double Trajectory::kl_sum() const {
  if (logprobs.size() != ref_logprobs.size()) {
    raise(ErrorCode::ShapeMismatch, "trajectory missing reference logprobs");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < logprobs.size(); ++i) total += logprobs[i] - ref_logprobs[i];
  return total;
}

PolicyModel::PolicyModel(DataTypeScheme scheme, int vocab_size, int embed_dim, std::uint64_t seed)
    : scheme_(scheme), vocab_size_(vocab_size), embed_dim_(embed_dim), seed_(seed) {
  if (vocab_size_ < 2) raise(ErrorCode::InvalidArgument, "policy needs a vocabulary of >= 2 tokens");
  if (embed_dim_ < 1) raise(ErrorCode::InvalidArgument, "embedding dim must be >= 1");
  tag_count_ = scheme_.label_width();
  params_.assign(param_count(), 0.0);
  // Embeddings and tag vectors are random; the output map starts at zero so
  // initial next-token distributions are uniform.
  Rng rng(derive_seed(seed, 0x504f4cULL));
  const double scale = 1.0 / std::sqrt(static_cast<double>(embed_dim_));
  for (std::size_t i = emb_off(); i < w_off(); ++i) params_[i] = scale * rng.normal();
}

int PolicyModel::tag_index(Dimension dim, int intensity) const {
  const int levels = scheme_.level_count(dim);
  if (intensity < 1 || intensity > levels) {
    raise(ErrorCode::IntensityOutOfRange,
          std::string(tag_name(dim)) + " intensity " + std::to_string(intensity));
  }
  return scheme_.block_offset(dim) + intensity - 1;
}

std::vector<double> PolicyModel::tag_vector(const PreferenceSpec& spec) const {
  std::vector<double> g(static_cast<std::size_t>(embed_dim_), 0.0);
  const double* table = params_.data() + tag_off();
  const auto targets = spec.targets();
  if (targets.empty()) {
    const double* null_row = table + static_cast<std::size_t>(tag_count_) * embed_dim_;
    g.assign(null_row, null_row + embed_dim_);
    return g;
  }
  for (auto [dim, n] : targets) {
    const double* row = table + static_cast<std::size_t>(tag_index(dim, n)) * embed_dim_;
    for (int j = 0; j < embed_dim_; ++j) g[static_cast<std::size_t>(j)] += row[j];
  }
  for (auto& v : g) v /= static_cast<double>(targets.size());
  return g;
}

void PolicyModel::logits(int prev_token, std::span<const double> tag_vec, std::span<double> z) const {
  const double* emb = params_.data() + emb_off() + static_cast<std::size_t>(prev_token) * embed_dim_;
  const double* w = params_.data() + w_off();
  const double* b = params_.data() + b_off();
  const auto e = static_cast<std::size_t>(embed_dim_);
  for (int v = 0; v < vocab_size_; ++v) {
    const double* row = w + static_cast<std::size_t>(v) * 2 * e;
    double acc = b[v];
    for (std::size_t j = 0; j < e; ++j) acc += row[j] * emb[j];
    for (std::size_t j = 0; j < e; ++j) acc += row[e + j] * tag_vec[j];
    z[static_cast<std::size_t>(v)] = acc;
  }
}

int PolicyModel::context_token(const TaggedPrompt& tp, const Vocabulary& vocab,
                               std::vector<int>& body_out) const {
  if (vocab.size() != vocab_size_) {
    raise(ErrorCode::SchemeMismatch, "vocabulary size differs from policy");
  }
  body_out = parse_body_tokens(tp.body, vocab);
  return body_out.empty() ? vocab.eos : body_out.back();
}

namespace {

// log softmax(z), numerically stable; returns logZ adjusted logits in place.
void log_softmax_inplace(std::span<double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - zmax);
  const double log_z = zmax + std::log(total);
  for (auto& v : z) v -= log_z;
}

}  // namespace

Trajectory PolicyModel::sample(const TaggedPrompt& tp, const Vocabulary& vocab, int max_len,
                               double temperature, std::uint64_t seed) const {
  if (max_len < 1) raise(ErrorCode::InvalidArgument, "max_len must be >= 1");
  std::vector<int> body;
  int prev = context_token(tp, vocab, body);
  const auto g = tag_vector(tp.spec);
  Rng rng(seed);
  Trajectory traj;
  traj.tagged_prompt = tp;
  std::vector<double> z(static_cast<std::size_t>(vocab_size_));
  std::vector<double> probs(static_cast<std::size_t>(vocab_size_));
  for (int t = 0; t < max_len; ++t) {
    logits(prev, g, z);
    int picked;
    if (temperature > 0.0) {
      for (std::size_t v = 0; v < probs.size(); ++v) probs[v] = z[v] / temperature;
      log_softmax_inplace(probs);
      for (auto& p : probs) p = std::exp(p);
      picked = static_cast<int>(rng.categorical(probs));
    } else {
      picked = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    }
    log_softmax_inplace(z);  // temperature-1 logprobs, matching logprob()
    traj.response.push_back(picked);
    traj.logprobs.push_back(z[static_cast<std::size_t>(picked)]);
    if (picked == vocab.eos) break;
    prev = picked;
  }
  return traj;
}

std::vector<double> PolicyModel::logprob(const TaggedPrompt& tp, const Vocabulary& vocab,
                                         std::span<const int> response) const {
  vocab.check(response);
  std::vector<int> body;
  int prev = context_token(tp, vocab, body);
  const auto g = tag_vector(tp.spec);
  std::vector<double> out;
  out.reserve(response.size());
  std::vector<double> z(static_cast<std::size_t>(vocab_size_));
  for (int token : response) {
    logits(prev, g, z);
    log_softmax_inplace(z);
    out.push_back(z[static_cast<std::size_t>(token)]);
    prev = token;
  }
  return out;
}

void PolicyModel::accumulate_logprob_grad(const TaggedPrompt& tp, const Vocabulary& vocab,
                                          std::span<const int> response, double coeff,
                                          std::vector<double>& grad) const {
  if (grad.size() != params_.size()) {
    raise(ErrorCode::ShapeMismatch, "gradient buffer size differs from parameter count");
  }
  vocab.check(response);
  std::vector<int> body;
  int prev = context_token(tp, vocab, body);
  const auto g = tag_vector(tp.spec);
  const auto targets = tp.spec.targets();
  const auto e = static_cast<std::size_t>(embed_dim_);

  const double* w = params_.data() + w_off();
  double* gw = grad.data() + w_off();
  double* gb = grad.data() + b_off();
  double* gemb = grad.data() + emb_off();
  double* gtag = grad.data() + tag_off();

  std::vector<double> z(static_cast<std::size_t>(vocab_size_));
  std::vector<double> dg(e, 0.0);
  for (int token : response) {
    logits(prev, g, z);
    log_softmax_inplace(z);
    const double* emb = params_.data() + emb_off() + static_cast<std::size_t>(prev) * e;
    double* gemb_prev = gemb + static_cast<std::size_t>(prev) * e;
    // d log p(y) / dz_v = 1[v == y] - p_v
    for (int v = 0; v < vocab_size_; ++v) {
      const double dz = coeff * ((v == token ? 1.0 : 0.0) - std::exp(z[static_cast<std::size_t>(v)]));
      if (dz == 0.0) continue;
      gb[v] += dz;
      const double* wrow = w + static_cast<std::size_t>(v) * 2 * e;
      double* gwrow = gw + static_cast<std::size_t>(v) * 2 * e;
      for (std::size_t j = 0; j < e; ++j) {
        gwrow[j] += dz * emb[j];
        gwrow[e + j] += dz * g[j];
        gemb_prev[j] += dz * wrow[j];
        dg[j] += dz * wrow[e + j];
      }
    }
    prev = token;
  }
  // Tag-vector gradient flows into the mean's constituents (or the null row).
  if (targets.empty()) {
    double* row = gtag + static_cast<std::size_t>(tag_count_) * e;
    for (std::size_t j = 0; j < e; ++j) row[j] += dg[j];
  } else {
    const double share = 1.0 / static_cast<double>(targets.size());
    for (auto [dim, n] : targets) {
      double* row = gtag + static_cast<std::size_t>(tag_index(dim, n)) * e;
      for (std::size_t j = 0; j < e; ++j) row[j] += dg[j] * share;
    }
  }
}

Checkpoint PolicyModel::to_checkpoint(std::uint64_t vocab_hash) const {
  Checkpoint ckpt;
  ckpt.header = {{"kind", "policy"}, {"scheme", scheme_.id},        {"v", vocab_size_},
                 {"e", embed_dim_},  {"seed", seed_},               {"vocab_hash", to_hex(vocab_hash)}};
  ckpt.params.assign(params_.begin(), params_.end());
  return ckpt;
}

PolicyModel PolicyModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.header.at("kind").get<std::string>() != "policy") {
    raise(ErrorCode::IoFailure, "checkpoint is not a policy");
  }
  PolicyModel policy(DataTypeScheme::from_id(ckpt.header.at("scheme").get<int>()),
                     ckpt.header.at("v").get<int>(), ckpt.header.at("e").get<int>(),
                     ckpt.header.at("seed").get<std::uint64_t>());
  if (ckpt.params.size() != policy.params_.size()) {
    raise(ErrorCode::IoFailure, "parameter count mismatch in checkpoint");
  }
  policy.params_ = ckpt.params;
  return policy;
}

double kl_to_ref(const PolicyModel& policy, const PolicyModel& ref, const TaggedPrompt& tp,
                 const Vocabulary& vocab, std::span<const int> response) {
  if (policy.vocab_size() != ref.vocab_size()) {
    raise(ErrorCode::ShapeMismatch, "policies use different vocabularies");
  }
  const auto lp = policy.logprob(tp, vocab, response);
  const auto lp_ref = ref.logprob(tp, vocab, response);
  double total = 0.0;
  for (std::size_t i = 0; i < lp.size(); ++i) total += lp[i] - lp_ref[i];
  return total;
}

PolicyModel merge_policies(std::span<const PolicyModel> policies, std::span<const double> lambdas,
                           bool allow_unnormalized) {
  if (policies.empty()) raise(ErrorCode::EmptyBatch, "merge needs at least one policy");
  if (policies.size() != lambdas.size()) {
    raise(ErrorCode::BadWeights, "weight count differs from policy count");
  }
  const PolicyModel& first = policies[0];
  for (const auto& p : policies) {
    if (p.vocab_size() != first.vocab_size() || p.embed_dim() != first.embed_dim() ||
        !(p.scheme() == first.scheme()) || p.params().size() != first.params().size()) {
      raise(ErrorCode::ShapeMismatch, "policies have different parameter shapes");
    }
  }
  if (!allow_unnormalized) {
    double total = 0.0;
    for (double l : lambdas) {
      if (l < 0.0) raise(ErrorCode::BadWeights, "weights must be nonnegative");
      total += l;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      raise(ErrorCode::BadWeights, "weights must sum to 1, got " + std::to_string(total));
    }
  }
  // One-hot weights reproduce the source parameter array bit-exactly.
  std::size_t nonzero = 0, last = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] != 0.0) {
      ++nonzero;
      last = i;
    }
  }
  if (nonzero == 1 && lambdas[last] == 1.0) return policies[last];

  PolicyModel merged = first;
  auto out = merged.mutable_params();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < policies.size(); ++i) {
    if (lambdas[i] == 0.0) continue;
    const auto src = policies[i].params();
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += lambdas[i] * src[j];
  }
  return merged;
}

}  // namespace moslim
