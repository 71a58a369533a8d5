#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moslim/error.hpp"

namespace moslim {

/// The three alignment objectives. Canonical order is the enum order; tag
/// names are the lowercase strings used by the prefix grammar.
enum class Dimension { Helpfulness = 0, Honesty = 1, Harmlessness = 2 };

inline constexpr int kNumDimensions = 3;
inline constexpr std::array<Dimension, kNumDimensions> kAllDimensions = {
    Dimension::Helpfulness, Dimension::Honesty, Dimension::Harmlessness};

const char* tag_name(Dimension dim);      // "helpfulness" | "honesty" | "harmless"
const char* display_name(Dimension dim);  // "Helpfulness" | "Honesty" | "Harmlessness"
std::optional<Dimension> dimension_from_tag_name(std::string_view name);

/// Intensity ceiling per dimension, canonical order. Which ceilings apply is
/// decided by the active data scheme.
using IntensityLimits = std::array<int, kNumDimensions>;

struct PreferenceDim {
  Dimension id;
  int max_intensity;
};

/// Ordered set of (dimension, intensity) targets. At most one entry per
/// dimension; intensity 0 marks an absent dimension.
class PreferenceSpec {
 public:
  PreferenceSpec() { intensity_.fill(0); }

  /// Sets the target intensity for a dimension. Throws DuplicateDimension if
  /// the dimension is already present and IntensityOutOfRange for n < 1.
  void set(Dimension dim, int intensity);

  bool has(Dimension dim) const { return intensity_[index(dim)] > 0; }
  int intensity(Dimension dim) const { return intensity_[index(dim)]; }
  int active_count() const;
  bool empty() const { return active_count() == 0; }

  /// Active (dimension, intensity) pairs in canonical dimension order.
  std::vector<std::pair<Dimension, int>> targets() const;

  /// Validates every target against the given ceilings.
  void validate(const IntensityLimits& limits) const;

  friend bool operator==(const PreferenceSpec&, const PreferenceSpec&) = default;

  static int index(Dimension dim) { return static_cast<int>(dim); }

 private:
  std::array<int, kNumDimensions> intensity_;
};

/// A prompt split into its preference targets and the task text. `body`
/// must not itself begin with a tag (serialization would not round-trip).
struct TaggedPrompt {
  PreferenceSpec spec;
  std::string body;

  friend bool operator==(const TaggedPrompt&, const TaggedPrompt&) = default;
};

/// Parses a `<dim n>*` prefix. Tags map to (dimension, intensity) targets;
/// the remainder, with leading whitespace trimmed, becomes the body. The
/// literal intensity `max` resolves to the dimension's ceiling.
///
/// Errors: MalformedTag, IntensityOutOfRange, DuplicateDimension.
TaggedPrompt parse_prefix(std::string_view text, const IntensityLimits& limits);

/// Emits tags in canonical dimension order, then one space, then the body.
/// parse_prefix inverts this for any valid TaggedPrompt.
std::string serialize_prefix(const TaggedPrompt& tp);

/// Removes the tag prefix, returning the body only. Purely lexical: tag
/// syntax is checked (MalformedTag) but intensities are not interpreted, so
/// any parseable input satisfies strip_tags(text) == parse_prefix(text).body.
/// Idempotent.
std::string strip_tags(std::string_view text);

/// True when the text carries at least one leading preference tag.
bool has_tag_prefix(std::string_view text);

}  // namespace moslim
