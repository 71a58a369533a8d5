#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "moslim/prefgrammar.hpp"
#include "moslim/synthenv.hpp"

namespace moslim {

/// One of the four label-granularity schemes. Levels per dimension:
///   1: {1,1,2}   2: {2,2,2}   3: {3,3,2}   4: {5,5,2}
struct DataTypeScheme {
  int id = 4;
  IntensityLimits levels = {5, 5, 2};

  static DataTypeScheme from_id(int id);

  int level_count(Dimension dim) const { return levels[PreferenceSpec::index(dim)]; }
  /// Width of the concatenated multi-hot label vector (4/6/8/12).
  int label_width() const { return levels[0] + levels[1] + levels[2]; }
  /// Offset of a dimension's block within the label vector.
  int block_offset(Dimension dim) const;

  friend bool operator==(const DataTypeScheme&, const DataTypeScheme&) = default;
};

/// Maps a raw oracle score onto 1..levels by equal-width bucketing; when the
/// raw range does not divide evenly the extra values land in the lower
/// buckets ("equal_width_low_tie"). Monotone and surjective. The first form
/// takes an explicit raw-range ceiling; the second uses the oracle's.
int map_raw_to_intensity(int raw, PreferenceDim dim_range, const DataTypeScheme& scheme);
int map_raw_to_intensity(int raw, Dimension dim, const DataTypeScheme& scheme);

/// Which dimensions receive labels in generated RM data.
enum class LabelMode {
  Full,   // all three dimensions labeled on every sample
  Pools,  // pool A: helpfulness+honesty only; pool B: harmlessness only
  RandomSubset,  // uniformly random nonempty subset
};

const char* label_mode_name(LabelMode mode);
LabelMode label_mode_from_name(std::string_view name);

/// One reward-model training record. `label` is multi-hot over the scheme's
/// concatenated intensity blocks; absent dimensions have all-zero blocks.
struct LabeledSample {
  std::vector<int> question;
  std::vector<int> answer;
  std::vector<std::uint8_t> label;

  bool dim_labeled(Dimension dim, const DataTypeScheme& scheme) const;
  /// 0-based class of a labeled dimension's hot bit.
  int label_class(Dimension dim, const DataTypeScheme& scheme) const;
};

/// One policy-optimization prompt: a preference prefix plus a task prompt.
struct PromptSample {
  TaggedPrompt tagged;
};

struct DatagenConfig {
  int prompt_length = kDefaultPromptLength;
  int response_length = kDefaultResponseLength;
  LabelMode label_mode = LabelMode::Full;
  double pool_a_fraction = 0.5;  // Pools mode: share of samples labeling helpfulness+honesty
  int workers = 1;
};

struct RmDataset {
  DataTypeScheme scheme;
  Vocabulary vocab;
  std::vector<LabeledSample> samples;
};

struct RlDataset {
  DataTypeScheme scheme;
  Vocabulary vocab;
  std::vector<PromptSample> samples;
};

/// Draws n (prompt, base response) pairs, scores them with the oracle and
/// attaches multi-hot labels. Deterministic per seed and independent of the
/// worker count.
RmDataset build_rm_dataset(int n, const DataTypeScheme& scheme, std::uint64_t seed,
                           const Vocabulary& vocab, const DatagenConfig& cfg = {});

/// Draws n tagged prompts: 1-3 distinct dimensions, uniform intensities.
RlDataset build_rl_dataset(int n, const DataTypeScheme& scheme, std::uint64_t seed,
                           const Vocabulary& vocab, const DatagenConfig& cfg = {});

inline constexpr const char* kBucketingName = "equal_width_low_tie";

/// JSONL serialization. Line 0 is a header carrying the vocabulary, scheme,
/// bucketing rule and config hash; each further line is one record.
std::string rm_dataset_to_jsonl(const RmDataset& ds, const std::string& config_hash);
std::string rl_dataset_to_jsonl(const RlDataset& ds, const std::string& config_hash);
RmDataset rm_dataset_from_jsonl(const std::string& text);
RlDataset rl_dataset_from_jsonl(const std::string& text);
void save_rm_dataset(const RmDataset& ds, const std::string& path, const std::string& config_hash);
void save_rl_dataset(const RlDataset& ds, const std::string& path, const std::string& config_hash);
RmDataset load_rm_dataset(const std::string& path);
RlDataset load_rl_dataset(const std::string& path);

}  // namespace moslim
