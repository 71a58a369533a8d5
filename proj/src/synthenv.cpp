#include "moslim/synthenv.hpp"

#include <algorithm>
#include <cstdio>

#include "moslim/rng.hpp"
#include "moslim/util.hpp"

namespace moslim {

void Vocabulary::check(std::span<const int> ids) const {
  for (int id : ids) {
    if (!contains(id)) {
      raise(ErrorCode::UnknownToken, "token id " + std::to_string(id) + " outside vocabulary of size " +
                                         std::to_string(size()));
    }
  }
}

Vocabulary Vocabulary::standard(int v) {
  if (v < 4) raise(ErrorCode::InvalidArgument, "vocabulary needs at least 4 tokens");
  Vocabulary vocab;
  vocab.tokens = {"<eos>", "help", "truth", "harm"};
  for (int i = 4; i < v; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%02d", i);
    vocab.tokens.emplace_back(buf);
  }
  return vocab;
}

nlohmann::json Vocabulary::to_json() const {
  return {{"tokens", tokens}, {"eos", eos}, {"help", help}, {"truth", truth}, {"harm", harm}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary vocab;
  vocab.tokens = j.at("tokens").get<std::vector<std::string>>();
  vocab.eos = j.at("eos").get<int>();
  vocab.help = j.at("help").get<int>();
  vocab.truth = j.at("truth").get<int>();
  vocab.harm = j.at("harm").get<int>();
  if (vocab.size() < 4) raise(ErrorCode::ConfigInvalid, "vocabulary too small");
  return vocab;
}

std::uint64_t Vocabulary::hash() const { return fnv1a(to_json().dump()); }

int OracleScore::raw(Dimension dim) const {
  switch (dim) {
    case Dimension::Helpfulness: return helpfulness;
    case Dimension::Honesty: return honesty;
    case Dimension::Harmlessness: return harmlessness;
  }
  return 0;
}

OracleScore oracle_score(std::span<const int> response, const Vocabulary& vocab) {
  if (response.empty()) raise(ErrorCode::InvalidArgument, "oracle_score: empty response");
  vocab.check(response);
  int n_help = 0, n_truth = 0, n_harm = 0;
  for (int id : response) {
    if (id == vocab.help) ++n_help;
    if (id == vocab.truth) ++n_truth;
    if (id == vocab.harm) ++n_harm;
  }
  OracleScore score;
  score.helpfulness = 1 + std::min(4, n_help);
  score.honesty = 1 + std::min(4, n_truth);
  score.harmlessness = n_harm > 0 ? 1 : 2;
  return score;
}

TokenDistribution TokenDistribution::uniform(const Vocabulary& vocab) {
  return {std::vector<double>(static_cast<std::size_t>(vocab.size()), 1.0 / vocab.size())};
}

TokenDistribution TokenDistribution::filler_only(const Vocabulary& vocab) {
  std::vector<double> probs(static_cast<std::size_t>(vocab.size()), 0.0);
  int fillers = 0;
  for (int i = 0; i < vocab.size(); ++i) {
    if (i != vocab.eos && i != vocab.help && i != vocab.truth && i != vocab.harm) {
      probs[static_cast<std::size_t>(i)] = 1.0;
      ++fillers;
    }
  }
  if (fillers == 0) raise(ErrorCode::InvalidArgument, "vocabulary has no filler tokens");
  for (auto& p : probs) p /= fillers;
  return {std::move(probs)};
}

std::vector<int> sample_base_response(std::span<const int> prompt, std::uint64_t rng_seed,
                                      int length, const Vocabulary& vocab,
                                      const TokenDistribution& dist) {
  (void)prompt;
  if (length < 1) raise(ErrorCode::InvalidArgument, "response length must be >= 1");
  if (static_cast<int>(dist.probs.size()) != vocab.size()) {
    raise(ErrorCode::ShapeMismatch, "distribution size != vocabulary size");
  }
  Rng rng(rng_seed);
  std::vector<int> out(static_cast<std::size_t>(length));
  for (auto& id : out) id = static_cast<int>(rng.categorical(dist.probs));
  return out;
}

std::vector<int> sample_base_response(std::span<const int> prompt, std::uint64_t rng_seed,
                                      int length, const Vocabulary& vocab) {
  return sample_base_response(prompt, rng_seed, length, vocab, TokenDistribution::uniform(vocab));
}

std::vector<int> sample_prompt_tokens(std::uint64_t rng_seed, int length, const Vocabulary& vocab) {
  return sample_base_response({}, rng_seed, length, vocab, TokenDistribution::filler_only(vocab));
}

std::string render_body(std::span<const int> ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(ids[i]);
  }
  return out;
}

std::vector<int> parse_body_tokens(std::string_view body, const Vocabulary& vocab) {
  std::vector<int> ids;
  for (const auto& part : split_ws(body)) {
    int value = 0;
    for (char c : part) {
      if (c < '0' || c > '9') {
        raise(ErrorCode::UnknownToken, "body token '" + part + "' is not a token id");
      }
      value = value * 10 + (c - '0');
      if (value > 1'000'000) raise(ErrorCode::UnknownToken, "token id too large: " + part);
    }
    ids.push_back(value);
  }
  vocab.check(ids);
  return ids;
}

}  // namespace moslim
