#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace moslim {

inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value);

/// Runs fn(i) for i in [0, n). With workers > 1 the index range is sharded
/// across threads; each index must derive its own randomness so results do
/// not depend on the shard layout.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

std::vector<std::string> split_ws(std::string_view text);

}  // namespace moslim
