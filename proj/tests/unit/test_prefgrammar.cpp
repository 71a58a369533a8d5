#include "doctest.h"

#include <string>

#include "moslim/datagen.hpp"
#include "moslim/prefgrammar.hpp"
#include "moslim/rng.hpp"

using namespace moslim;

namespace {

const IntensityLimits kDt4 = DataTypeScheme::from_id(4).levels;

// Random valid TaggedPrompt for round-trip properties. Bodies avoid leading
// whitespace and a leading '<' (both are outside the serializable set).
TaggedPrompt random_prompt(Rng& rng) {
  TaggedPrompt tp;
  for (Dimension dim : kAllDimensions) {
    if (rng.uniform() < 0.5) {
      tp.spec.set(dim, rng.uniform_int(1, kDt4[PreferenceSpec::index(dim)]));
    }
  }
  const char* bodies[] = {"", "Q", "Summarize this.", "a < b", "7 3 11 0", "x  y   z"};
  tp.body = bodies[rng.uniform_int(0, 5)];
  return tp;
}

}  // namespace

TEST_CASE("parse_prefix maps tags and trims the body") {
  const auto tp = parse_prefix("<helpfulness 5> Summarize this.", kDt4);
  CHECK(tp.spec.active_count() == 1);
  CHECK(tp.spec.intensity(Dimension::Helpfulness) == 5);
  CHECK(tp.body == "Summarize this.");
}

TEST_CASE("parse_prefix on tag-free text yields an empty spec") {
  const auto tp = parse_prefix("Summarize this.", kDt4);
  CHECK(tp.spec.empty());
  CHECK(tp.body == "Summarize this.");
}

TEST_CASE("parse_prefix handles multiple tags") {
  const auto tp = parse_prefix("<harmless 2><helpfulness 3> Q", kDt4);
  CHECK(tp.spec.intensity(Dimension::Harmlessness) == 2);
  CHECK(tp.spec.intensity(Dimension::Helpfulness) == 3);
  CHECK(!tp.spec.has(Dimension::Honesty));
  CHECK(tp.body == "Q");
}

TEST_CASE("the max alias resolves to the dimension ceiling") {
  const auto tp = parse_prefix("<harmless max><helpfulness max> Q", kDt4);
  CHECK(tp.spec.intensity(Dimension::Harmlessness) == 2);
  CHECK(tp.spec.intensity(Dimension::Helpfulness) == 5);

  const auto dt2 = DataTypeScheme::from_id(2).levels;
  CHECK(parse_prefix("<helpfulness max> Q", dt2).spec.intensity(Dimension::Helpfulness) == 2);
}

TEST_CASE("parse_prefix error cases") {
  auto code_of = [](const char* text) {
    try {
      parse_prefix(text, kDt4);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of("<wisdom 3> Q") == ErrorCode::MalformedTag);       // unknown name
  CHECK(code_of("<helpfulness x> Q") == ErrorCode::MalformedTag);  // non-integer
  CHECK(code_of("<helpfulness 3 Q") == ErrorCode::MalformedTag);   // unclosed
  CHECK(code_of("<helpfulness> Q") == ErrorCode::MalformedTag);    // missing intensity
  CHECK(code_of("<helpfulness 0> Q") == ErrorCode::IntensityOutOfRange);
  CHECK(code_of("<helpfulness 6> Q") == ErrorCode::IntensityOutOfRange);
  CHECK(code_of("<harmless 3> Q") == ErrorCode::IntensityOutOfRange);
  CHECK(code_of("<helpfulness 2><helpfulness 2> Q") == ErrorCode::DuplicateDimension);
}

TEST_CASE("serialize_prefix emits canonical order") {
  TaggedPrompt tp;
  tp.spec.set(Dimension::Harmlessness, 2);
  tp.spec.set(Dimension::Honesty, 1);
  tp.body = "Q";
  CHECK(serialize_prefix(tp) == "<honesty 1><harmless 2> Q");

  TaggedPrompt single;
  single.spec.set(Dimension::Helpfulness, 5);
  single.body = "Q";
  CHECK(serialize_prefix(single) == "<helpfulness 5> Q");

  TaggedPrompt empty;
  empty.body = "Q";
  CHECK(serialize_prefix(empty) == "Q");
}

TEST_CASE("strip_tags removes the prefix and is idempotent") {
  CHECK(strip_tags("<helpfulness 5> Q") == "Q");
  CHECK(strip_tags("Q") == "Q");
  CHECK(strip_tags("<honesty 1><harmless 2> long prompt body") == "long prompt body");
  // Lexical only: out-of-range intensities or duplicates still strip.
  CHECK(strip_tags("<helpfulness 99> Q") == "Q");

  const char* inputs[] = {"<helpfulness 5> Q", "Q", "a < b", "<harmless max> tail"};
  for (const char* s : inputs) {
    const auto once = strip_tags(s);
    CHECK(strip_tags(once) == once);
  }
}

TEST_CASE("round-trip property: parse(serialize(tp)) == tp") {
  Rng rng(20240811);
  for (int iter = 0; iter < 2000; ++iter) {
    const auto tp = random_prompt(rng);
    const auto text = serialize_prefix(tp);
    const auto back = parse_prefix(text, kDt4);
    CHECK(back == tp);
    CHECK(strip_tags(text) == tp.body);
  }
}

TEST_CASE("serialization is independent of insertion order") {
  TaggedPrompt a, b;
  a.spec.set(Dimension::Harmlessness, 1);
  a.spec.set(Dimension::Helpfulness, 4);
  b.spec.set(Dimension::Helpfulness, 4);
  b.spec.set(Dimension::Harmlessness, 1);
  a.body = b.body = "task";
  CHECK(serialize_prefix(a) == serialize_prefix(b));
}

TEST_CASE("spec validation against scheme limits") {
  PreferenceSpec spec;
  spec.set(Dimension::Helpfulness, 4);
  CHECK_NOTHROW(spec.validate(kDt4));
  const auto dt2 = DataTypeScheme::from_id(2).levels;
  CHECK_THROWS_AS(spec.validate(dt2), Error);
}
