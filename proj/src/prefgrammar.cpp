#include "moslim/prefgrammar.hpp"

#include <cctype>
#include <limits>

namespace moslim {

namespace {

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::size_t skip_ws(std::string_view text, std::size_t pos) {
  while (pos < text.size() && is_ws(text[pos])) ++pos;
  return pos;
}

struct RawTag {
  Dimension dim;
  int intensity;  // -1 means the literal "max"
};

// Lexes one tag starting at text[pos] == '<'. Returns the position just past
// the closing '>'. Grammar: "<" name " " intensity ">", intensity := digits | "max".
std::size_t lex_tag(std::string_view text, std::size_t pos, RawTag& out) {
  const std::size_t start = pos;
  ++pos;  // '<'
  std::size_t name_start = pos;
  while (pos < text.size() && std::islower(static_cast<unsigned char>(text[pos]))) ++pos;
  const auto name = text.substr(name_start, pos - name_start);
  const auto dim = dimension_from_tag_name(name);
  if (!dim) {
    raise(ErrorCode::MalformedTag,
          "unknown dimension name '" + std::string(name) + "' at offset " + std::to_string(start));
  }
  if (pos >= text.size() || !is_ws(text[pos])) {
    raise(ErrorCode::MalformedTag, "expected space after dimension name at offset " + std::to_string(pos));
  }
  pos = skip_ws(text, pos);
  std::size_t value_start = pos;
  while (pos < text.size() && text[pos] != '>' && !is_ws(text[pos])) ++pos;
  const auto value = text.substr(value_start, pos - value_start);
  pos = skip_ws(text, pos);
  if (pos >= text.size() || text[pos] != '>') {
    raise(ErrorCode::MalformedTag, "unclosed tag at offset " + std::to_string(start));
  }
  ++pos;  // '>'

  int n = 0;
  if (value == "max") {
    n = -1;
  } else {
    if (value.empty()) raise(ErrorCode::MalformedTag, "missing intensity at offset " + std::to_string(value_start));
    long parsed = 0;
    for (char c : value) {
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        raise(ErrorCode::MalformedTag, "non-integer intensity '" + std::string(value) + "'");
      }
      parsed = parsed * 10 + (c - '0');
      if (parsed > std::numeric_limits<int>::max()) {
        raise(ErrorCode::IntensityOutOfRange, "intensity overflow in '" + std::string(value) + "'");
      }
    }
    n = static_cast<int>(parsed);
  }
  out = RawTag{*dim, n};
  return pos;
}

// Shared scan over the tag prefix. Invokes sink for every tag and returns
// the offset where the body starts (leading whitespace already skipped).
template <typename Sink>
std::size_t scan_prefix(std::string_view text, Sink&& sink) {
  std::size_t pos = skip_ws(text, 0);
  while (pos < text.size() && text[pos] == '<') {
    RawTag tag{};
    pos = lex_tag(text, pos, tag);
    sink(tag);
    pos = skip_ws(text, pos);
  }
  return pos;
}

}  // namespace

const char* tag_name(Dimension dim) {
  switch (dim) {
    case Dimension::Helpfulness: return "helpfulness";
    case Dimension::Honesty: return "honesty";
    case Dimension::Harmlessness: return "harmless";
  }
  return "?";
}

const char* display_name(Dimension dim) {
  switch (dim) {
    case Dimension::Helpfulness: return "Helpfulness";
    case Dimension::Honesty: return "Honesty";
    case Dimension::Harmlessness: return "Harmlessness";
  }
  return "?";
}

std::optional<Dimension> dimension_from_tag_name(std::string_view name) {
  for (Dimension dim : kAllDimensions) {
    if (name == tag_name(dim)) return dim;
  }
  return std::nullopt;
}

void PreferenceSpec::set(Dimension dim, int intensity) {
  if (intensity < 1) {
    raise(ErrorCode::IntensityOutOfRange,
          std::string(tag_name(dim)) + " intensity " + std::to_string(intensity) + " < 1");
  }
  if (has(dim)) {
    raise(ErrorCode::DuplicateDimension, std::string(tag_name(dim)) + " specified twice");
  }
  intensity_[index(dim)] = intensity;
}

int PreferenceSpec::active_count() const {
  int n = 0;
  for (int v : intensity_) n += v > 0 ? 1 : 0;
  return n;
}

std::vector<std::pair<Dimension, int>> PreferenceSpec::targets() const {
  std::vector<std::pair<Dimension, int>> out;
  for (Dimension dim : kAllDimensions) {
    if (has(dim)) out.emplace_back(dim, intensity(dim));
  }
  return out;
}

void PreferenceSpec::validate(const IntensityLimits& limits) const {
  for (Dimension dim : kAllDimensions) {
    const int n = intensity_[index(dim)];
    if (n > limits[index(dim)]) {
      raise(ErrorCode::IntensityOutOfRange,
            std::string(tag_name(dim)) + " intensity " + std::to_string(n) + " exceeds " +
                std::to_string(limits[index(dim)]));
    }
  }
}

TaggedPrompt parse_prefix(std::string_view text, const IntensityLimits& limits) {
  TaggedPrompt tp;
  const std::size_t body_start = scan_prefix(text, [&](const RawTag& tag) {
    const int limit = limits[PreferenceSpec::index(tag.dim)];
    const int n = tag.intensity < 0 ? limit : tag.intensity;
    if (n < 1 || n > limit) {
      raise(ErrorCode::IntensityOutOfRange,
            std::string(tag_name(tag.dim)) + " intensity " + std::to_string(n) +
                " outside 1.." + std::to_string(limit));
    }
    tp.spec.set(tag.dim, n);
  });
  tp.body = std::string(text.substr(body_start));
  return tp;
}

std::string serialize_prefix(const TaggedPrompt& tp) {
  std::string out;
  for (auto [dim, n] : tp.spec.targets()) {
    out += '<';
    out += tag_name(dim);
    out += ' ';
    out += std::to_string(n);
    out += '>';
  }
  if (!out.empty() && !tp.body.empty()) out += ' ';
  out += tp.body;
  return out;
}

std::string strip_tags(std::string_view text) {
  const std::size_t body_start = scan_prefix(text, [](const RawTag&) {});
  return std::string(text.substr(body_start));
}

bool has_tag_prefix(std::string_view text) {
  const std::size_t pos = skip_ws(text, 0);
  if (pos >= text.size() || text[pos] != '<') return false;
  RawTag tag{};
  lex_tag(text, pos, tag);  // throws on malformed syntax
  return true;
}

}  // namespace moslim
