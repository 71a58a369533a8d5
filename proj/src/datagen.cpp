#include "moslim/datagen.hpp"

#include <sstream>

#include "json.hpp"

#include "moslim/rng.hpp"
#include "moslim/util.hpp"

namespace moslim {

using nlohmann::json;

DataTypeScheme DataTypeScheme::from_id(int id) {
  switch (id) {
    case 1: return {1, {1, 1, 2}};
    case 2: return {2, {2, 2, 2}};
    case 3: return {3, {3, 3, 2}};
    case 4: return {4, {5, 5, 2}};
    default: raise(ErrorCode::ConfigInvalid, "scheme id must be 1..4, got " + std::to_string(id));
  }
}

int DataTypeScheme::block_offset(Dimension dim) const {
  int offset = 0;
  for (int i = 0; i < PreferenceSpec::index(dim); ++i) offset += levels[i];
  return offset;
}

int map_raw_to_intensity(int raw, PreferenceDim dim_range, const DataTypeScheme& scheme) {
  const int lo = 1;
  const int hi = dim_range.max_intensity;
  if (raw < lo || raw > hi) {
    raise(ErrorCode::RawOutOfRange, "raw score " + std::to_string(raw) + " outside " +
                                        std::to_string(lo) + ".." + std::to_string(hi));
  }
  const int range = hi - lo + 1;
  const int buckets = scheme.level_count(dim_range.id);
  return 1 + (raw - lo) * buckets / range;
}

int map_raw_to_intensity(int raw, Dimension dim, const DataTypeScheme& scheme) {
  return map_raw_to_intensity(raw, PreferenceDim{dim, OracleScore::raw_max(dim)}, scheme);
}

const char* label_mode_name(LabelMode mode) {
  switch (mode) {
    case LabelMode::Full: return "full";
    case LabelMode::Pools: return "pools";
    case LabelMode::RandomSubset: return "random_subset";
  }
  return "?";
}

LabelMode label_mode_from_name(std::string_view name) {
  if (name == "full") return LabelMode::Full;
  if (name == "pools") return LabelMode::Pools;
  if (name == "random_subset") return LabelMode::RandomSubset;
  raise(ErrorCode::ConfigInvalid, "unknown label mode '" + std::string(name) + "'");
}

bool LabeledSample::dim_labeled(Dimension dim, const DataTypeScheme& scheme) const {
  const int off = scheme.block_offset(dim);
  for (int j = 0; j < scheme.level_count(dim); ++j) {
    if (label[static_cast<std::size_t>(off + j)]) return true;
  }
  return false;
}

int LabeledSample::label_class(Dimension dim, const DataTypeScheme& scheme) const {
  const int off = scheme.block_offset(dim);
  for (int j = 0; j < scheme.level_count(dim); ++j) {
    if (label[static_cast<std::size_t>(off + j)]) return j;
  }
  raise(ErrorCode::InvalidArgument, "dimension has no label");
}

namespace {

std::vector<bool> pick_labeled_dims(LabelMode mode, double pool_a_fraction, Rng& rng) {
  std::vector<bool> labeled(kNumDimensions, false);
  switch (mode) {
    case LabelMode::Full:
      labeled.assign(kNumDimensions, true);
      break;
    case LabelMode::Pools:
      if (rng.uniform() < pool_a_fraction) {
        labeled[PreferenceSpec::index(Dimension::Helpfulness)] = true;
        labeled[PreferenceSpec::index(Dimension::Honesty)] = true;
      } else {
        labeled[PreferenceSpec::index(Dimension::Harmlessness)] = true;
      }
      break;
    case LabelMode::RandomSubset: {
      const int subset = rng.uniform_int(1, (1 << kNumDimensions) - 1);
      for (int i = 0; i < kNumDimensions; ++i) labeled[i] = (subset >> i) & 1;
      break;
    }
  }
  return labeled;
}

}  // namespace

RmDataset build_rm_dataset(int n, const DataTypeScheme& scheme, std::uint64_t seed,
                           const Vocabulary& vocab, const DatagenConfig& cfg) {
  if (n < 1) raise(ErrorCode::InvalidCount, "sample count must be >= 1, got " + std::to_string(n));
  RmDataset ds{scheme, vocab, std::vector<LabeledSample>(static_cast<std::size_t>(n))};
  parallel_for(static_cast<std::size_t>(n), cfg.workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    LabeledSample sample;
    sample.question = sample_prompt_tokens(rng.next(), cfg.prompt_length, vocab);
    sample.answer = sample_base_response(sample.question, rng.next(), cfg.response_length, vocab);
    const OracleScore score = oracle_score(sample.answer, vocab);
    const auto labeled = pick_labeled_dims(cfg.label_mode, cfg.pool_a_fraction, rng);
    sample.label.assign(static_cast<std::size_t>(scheme.label_width()), 0);
    for (Dimension dim : kAllDimensions) {
      if (!labeled[static_cast<std::size_t>(PreferenceSpec::index(dim))]) continue;
      const int intensity = map_raw_to_intensity(score.raw(dim), dim, scheme);
      sample.label[static_cast<std::size_t>(scheme.block_offset(dim) + intensity - 1)] = 1;
    }
    ds.samples[i] = std::move(sample);
  });
  return ds;
}

RlDataset build_rl_dataset(int n, const DataTypeScheme& scheme, std::uint64_t seed,
                           const Vocabulary& vocab, const DatagenConfig& cfg) {
  if (n < 1) raise(ErrorCode::InvalidCount, "sample count must be >= 1, got " + std::to_string(n));
  RlDataset ds{scheme, vocab, std::vector<PromptSample>(static_cast<std::size_t>(n))};
  parallel_for(static_cast<std::size_t>(n), cfg.workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed ^ 0x726c00ULL, i));
    PromptSample sample;
    const int n_dims = rng.uniform_int(1, kNumDimensions);
    std::vector<Dimension> dims(kAllDimensions.begin(), kAllDimensions.end());
    rng.shuffle(dims);
    dims.resize(static_cast<std::size_t>(n_dims));
    for (Dimension dim : dims) {
      sample.tagged.spec.set(dim, rng.uniform_int(1, scheme.level_count(dim)));
    }
    sample.tagged.body = render_body(sample_prompt_tokens(rng.next(), cfg.prompt_length, vocab));
    ds.samples[i] = std::move(sample);
  });
  return ds;
}

namespace {

json dataset_header(const char* kind, const DataTypeScheme& scheme, const Vocabulary& vocab,
                    std::size_t n, const std::string& config_hash) {
  return {{"kind", kind},
          {"vocab", vocab.to_json()},
          {"scheme", scheme.id},
          {"bucketing", kBucketingName},
          {"n", n},
          {"config_hash", config_hash}};
}

std::pair<json, std::vector<std::string>> split_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) raise(ErrorCode::IoFailure, "empty dataset file");
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object()) {
    raise(ErrorCode::IoFailure, "bad dataset header line");
  }
  std::vector<std::string> records;
  while (std::getline(in, line)) {
    if (!line.empty()) records.push_back(line);
  }
  return {std::move(header), std::move(records)};
}

}  // namespace

std::string rm_dataset_to_jsonl(const RmDataset& ds, const std::string& config_hash) {
  std::string out =
      dataset_header("rm_dataset", ds.scheme, ds.vocab, ds.samples.size(), config_hash).dump();
  out += '\n';
  for (const auto& s : ds.samples) {
    json rec = {{"q", s.question}, {"a", s.answer}, {"label", s.label}, {"scheme", ds.scheme.id}};
    out += rec.dump();
    out += '\n';
  }
  return out;
}

std::string rl_dataset_to_jsonl(const RlDataset& ds, const std::string& config_hash) {
  std::string out =
      dataset_header("rl_dataset", ds.scheme, ds.vocab, ds.samples.size(), config_hash).dump();
  out += '\n';
  for (const auto& s : ds.samples) {
    json rec = {{"text", serialize_prefix(s.tagged)}};
    out += rec.dump();
    out += '\n';
  }
  return out;
}

RmDataset rm_dataset_from_jsonl(const std::string& text) {
  auto [header, records] = split_jsonl(text);
  RmDataset ds;
  ds.scheme = DataTypeScheme::from_id(header.at("scheme").get<int>());
  ds.vocab = Vocabulary::from_json(header.at("vocab"));
  ds.samples.reserve(records.size());
  for (const auto& line : records) {
    json rec = json::parse(line);
    if (rec.at("scheme").get<int>() != ds.scheme.id) {
      raise(ErrorCode::SchemeMismatch, "record scheme differs from header");
    }
    LabeledSample s;
    s.question = rec.at("q").get<std::vector<int>>();
    s.answer = rec.at("a").get<std::vector<int>>();
    s.label = rec.at("label").get<std::vector<std::uint8_t>>();
    if (static_cast<int>(s.label.size()) != ds.scheme.label_width()) {
      raise(ErrorCode::ShapeMismatch, "label width differs from scheme");
    }
    ds.vocab.check(s.question);
    ds.vocab.check(s.answer);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

RlDataset rl_dataset_from_jsonl(const std::string& text) {
  auto [header, records] = split_jsonl(text);
  RlDataset ds;
  ds.scheme = DataTypeScheme::from_id(header.at("scheme").get<int>());
  ds.vocab = Vocabulary::from_json(header.at("vocab"));
  ds.samples.reserve(records.size());
  for (const auto& line : records) {
    json rec = json::parse(line);
    PromptSample s;
    s.tagged = parse_prefix(rec.at("text").get<std::string>(), ds.scheme.levels);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

void save_rm_dataset(const RmDataset& ds, const std::string& path, const std::string& config_hash) {
  write_file(path, rm_dataset_to_jsonl(ds, config_hash));
}

void save_rl_dataset(const RlDataset& ds, const std::string& path, const std::string& config_hash) {
  write_file(path, rl_dataset_to_jsonl(ds, config_hash));
}

RmDataset load_rm_dataset(const std::string& path) { return rm_dataset_from_jsonl(read_file(path)); }

RlDataset load_rl_dataset(const std::string& path) { return rl_dataset_from_jsonl(read_file(path)); }

}  // namespace moslim
