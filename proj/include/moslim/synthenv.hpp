#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "moslim/prefgrammar.hpp"

namespace moslim {

/// Token inventory for the synthetic environment. Three designated tokens
/// carry all of the oracle signal; everything else is filler.
struct Vocabulary {
  std::vector<std::string> tokens;
  int eos = 0;
  int help = 1;
  int truth = 2;
  int harm = 3;

  int size() const { return static_cast<int>(tokens.size()); }
  bool contains(int id) const { return id >= 0 && id < size(); }
  void check(std::span<const int> ids) const;

  /// Default vocabulary: <eos>, help, truth, harm, then filler w04..w{V-1}.
  static Vocabulary standard(int v = 16);

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);
  std::uint64_t hash() const;
};

/// Ground-truth raw scores: helpfulness/honesty in 1..5, harmlessness in
/// 1..2. A deterministic function of the token sequence.
struct OracleScore {
  int helpfulness = 1;
  int honesty = 1;
  int harmlessness = 2;

  int raw(Dimension dim) const;
  static constexpr int raw_min(Dimension) { return 1; }
  static constexpr int raw_max(Dimension dim) {
    return dim == Dimension::Harmlessness ? 2 : 5;
  }
};

/// Scores a response by designated-token counts:
///   helpfulness = 1 + min(4, #help), honesty = 1 + min(4, #truth),
///   harmlessness = 1 if any harm token else 2.
OracleScore oracle_score(std::span<const int> response, const Vocabulary& vocab);

/// Categorical sampling distribution over token ids.
struct TokenDistribution {
  std::vector<double> probs;

  static TokenDistribution uniform(const Vocabulary& vocab);
  /// Uniform over filler tokens only: prompts drawn from this distribution
  /// carry no oracle signal, so response labels stay identifiable from
  /// bag-of-token features over the concatenated pair.
  static TokenDistribution filler_only(const Vocabulary& vocab);
};

/// i.i.d. tokens from `dist`; reproducible for identical seeds. The prompt
/// does not influence the default sampler (it stands in for an unconditioned
/// base model).
std::vector<int> sample_base_response(std::span<const int> prompt, std::uint64_t rng_seed,
                                      int length, const Vocabulary& vocab,
                                      const TokenDistribution& dist);
std::vector<int> sample_base_response(std::span<const int> prompt, std::uint64_t rng_seed,
                                      int length, const Vocabulary& vocab);

/// Task-prompt sampler (filler tokens only).
std::vector<int> sample_prompt_tokens(std::uint64_t rng_seed, int length, const Vocabulary& vocab);

/// Token ids rendered as a space-separated string; the body format used in
/// every dataset file.
std::string render_body(std::span<const int> ids);
std::vector<int> parse_body_tokens(std::string_view body, const Vocabulary& vocab);

inline constexpr int kDefaultVocabSize = 16;
inline constexpr int kDefaultPromptLength = 8;
inline constexpr int kDefaultResponseLength = 24;

}  // namespace moslim
