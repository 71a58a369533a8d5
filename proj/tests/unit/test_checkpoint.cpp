#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "moslim/checkpoint.hpp"
#include "moslim/config.hpp"
#include "moslim/error.hpp"

using namespace moslim;

TEST_CASE("checkpoint bytes round-trip") {
  Checkpoint ckpt;
  ckpt.header = {{"kind", "policy"}, {"scheme", 4}};
  ckpt.params = {1.5, -2.25, 0.0, 3.14159, -0.0};
  const auto bytes = checkpoint_to_bytes(ckpt);
  const auto back = checkpoint_from_bytes(bytes);
  CHECK(back.header.at("kind") == "policy");
  CHECK(back.header.at("param_count") == 5);
  REQUIRE(back.params.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(back.params[i] == ckpt.params[i]);
}

TEST_CASE("checkpoint rejects corrupt payloads") {
  Checkpoint ckpt;
  ckpt.header = {{"kind", "policy"}};
  ckpt.params = {1.0, 2.0};
  auto bytes = checkpoint_to_bytes(ckpt);
  bytes.pop_back();
  CHECK_THROWS_AS(checkpoint_from_bytes(bytes), Error);
  CHECK_THROWS_AS(checkpoint_from_bytes("not json"), Error);
}

TEST_CASE("flat config parses key = value lines") {
  const auto cfg = FlatConfig::parse(
      "# training settings\n"
      "algo = ppo\n"
      "lr = 0.01   # desk default\n"
      "steps = 200\n"
      "greedy = false\n"
      "name = \"run a\"\n");
  CHECK(cfg.get_string("algo", "") == "ppo");
  CHECK(cfg.get_double("lr", 0.0) == doctest::Approx(0.01));
  CHECK(cfg.get_int("steps", 0) == 200);
  CHECK(cfg.get_bool("greedy", true) == false);
  CHECK(cfg.get_string("name", "") == "run a");
  CHECK(cfg.get_int("missing", 7) == 7);
  CHECK_THROWS_AS(FlatConfig::parse("no equals sign"), Error);
  CHECK_THROWS_AS(cfg.get_int("algo", 0), Error);
}

TEST_CASE("semantic hash ignores execution-resource keys") {
  auto a = FlatConfig::parse("algo = ppo\nseed = 1\nworkers = 1\nmetrics_path = x.jsonl\n");
  auto b = FlatConfig::parse("algo = ppo\nseed = 1\nworkers = 4\nmetrics_path = y.jsonl\n");
  auto c = FlatConfig::parse("algo = ppo\nseed = 2\nworkers = 1\n");
  CHECK(a.semantic_hash() == b.semantic_hash());
  CHECK(a.semantic_hash() != c.semantic_hash());
}

TEST_CASE("stamp_header controls the timestamp field") {
  nlohmann::json h1 = {{"kind", "test"}};
  nlohmann::json h2 = {{"kind", "test"}};
  stamp_header(h1, "aa", false);
  stamp_header(h2, "aa", true);
  CHECK(!h1.contains("timestamp"));
  CHECK(h2.contains("timestamp"));
  CHECK(h1.at("config_hash") == "aa");
}
