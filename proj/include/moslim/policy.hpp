#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "moslim/checkpoint.hpp"
#include "moslim/datagen.hpp"
#include "moslim/prefgrammar.hpp"
#include "moslim/synthenv.hpp"

namespace moslim {

/// One rollout: the prompt it was sampled for, the response tokens, and the
/// per-token log-probabilities under the sampling policy and the reference.
struct Trajectory {
  TaggedPrompt tagged_prompt;
  std::vector<int> response;
  std::vector<double> logprobs;
  std::vector<double> ref_logprobs;

  double logprob_sum() const;
  double ref_logprob_sum() const;
  /// Sampled sequence-level log-ratio sum (may be negative per sample).
  double kl_sum() const;
};

/// Autoregressive token policy conditioned on the preference prefix.
///
/// Next-token logits are an affine map of [prev-token embedding ; tag
/// embedding], where the tag embedding is the mean of the prompt's tag
/// vectors (a dedicated null vector when the prompt carries no tags). The
/// prompt body's last token seeds the first step; the end-of-sequence
/// embedding is used when the body is empty. The output map starts at zero,
/// so a freshly initialized policy is exactly uniform.
class PolicyModel {
 public:
  PolicyModel() = default;
  PolicyModel(DataTypeScheme scheme, int vocab_size, int embed_dim, std::uint64_t seed);

  int vocab_size() const { return vocab_size_; }
  int embed_dim() const { return embed_dim_; }
  const DataTypeScheme& scheme() const { return scheme_; }
  std::uint64_t seed() const { return seed_; }
  int tag_count() const { return tag_count_; }

  std::span<const double> params() const { return params_; }
  std::span<double> mutable_params() { return params_; }

  /// Samples until EOS or max_len. temperature shapes exploration only
  /// (<= 0 selects greedy argmax); recorded logprobs are always the
  /// policy's own (temperature-1) values so they match logprob() exactly.
  Trajectory sample(const TaggedPrompt& tp, const Vocabulary& vocab, int max_len,
                    double temperature, std::uint64_t seed) const;

  /// Exact per-token log pi(y_t | y_<t, prefix).
  std::vector<double> logprob(const TaggedPrompt& tp, const Vocabulary& vocab,
                              std::span<const int> response) const;

  /// Adds coeff * d(sum_t log pi(y_t))/d(params) into grad (which must
  /// already have param-count size).
  void accumulate_logprob_grad(const TaggedPrompt& tp, const Vocabulary& vocab,
                               std::span<const int> response, double coeff,
                               std::vector<double>& grad) const;

  Checkpoint to_checkpoint(std::uint64_t vocab_hash) const;
  static PolicyModel from_checkpoint(const Checkpoint& ckpt);

  /// 0-based index of a tag's conditioning vector; tags are laid out per
  /// dimension in canonical order, intensities ascending. tag_count() is the
  /// null vector used for tag-free prompts.
  int tag_index(Dimension dim, int intensity) const;

  friend bool operator==(const PolicyModel&, const PolicyModel&) = default;

 private:
  std::vector<double> tag_vector(const PreferenceSpec& spec) const;
  void logits(int prev_token, std::span<const double> tag_vec, std::span<double> z) const;
  int context_token(const TaggedPrompt& tp, const Vocabulary& vocab,
                    std::vector<int>& body_out) const;

  // Flat layout: [embeddings (V x E), tag table ((T+1) x E), W (V x 2E), b (V)].
  std::size_t emb_off() const { return 0; }
  std::size_t tag_off() const { return static_cast<std::size_t>(vocab_size_) * embed_dim_; }
  std::size_t w_off() const {
    return tag_off() + static_cast<std::size_t>(tag_count_ + 1) * embed_dim_;
  }
  std::size_t b_off() const {
    return w_off() + static_cast<std::size_t>(vocab_size_) * 2 * embed_dim_;
  }
  std::size_t param_count() const { return b_off() + static_cast<std::size_t>(vocab_size_); }

  DataTypeScheme scheme_;
  int vocab_size_ = 0;
  int embed_dim_ = 0;
  int tag_count_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> params_;
};

/// Sampled sequence-level log-ratio sum_t [log pi(y_t) - log pi_ref(y_t)].
/// Zero when the policies are identical; nonnegative in expectation over
/// on-policy samples.
double kl_to_ref(const PolicyModel& policy, const PolicyModel& ref, const TaggedPrompt& tp,
                 const Vocabulary& vocab, std::span<const int> response);

/// Convex parameter combination across policies of identical shape. Weights
/// must lie on the simplex unless allow_unnormalized is set.
PolicyModel merge_policies(std::span<const PolicyModel> policies, std::span<const double> lambdas,
                           bool allow_unnormalized = false);

inline constexpr int kDefaultEmbedDim = 16;

}  // namespace moslim
