#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace moslim {

/// Flat `key = value` config files (# starts a comment). Keys mirror the
/// training-config field names; CLI flags override file values.
class FlatConfig {
 public:
  FlatConfig() = default;

  static FlatConfig parse(std::string_view text);
  static FlatConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  long get_int(const std::string& key, long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Canonical "key = value" rendering, keys sorted.
  std::string canonical() const;

  /// Hash over the canonical rendering, excluding execution-resource keys
  /// (workers, output paths, timestamp switch) so reruns that differ only in
  /// fan-out or destinations hash identically.
  std::string semantic_hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace moslim
