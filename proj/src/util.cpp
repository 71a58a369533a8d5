#include "moslim/util.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "moslim/error.hpp"

namespace moslim {

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return std::string(buf);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers < 1) workers = 1;
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const auto w = static_cast<std::size_t>(workers);
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    threads.emplace_back([t, w, n, &fn] {
      const std::size_t lo = n * t / w;
      const std::size_t hi = n * (t + 1) / w;
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : threads) th.join();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoFailure, "cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoFailure, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) raise(ErrorCode::IoFailure, "short write to " + path);
}

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) parts.emplace_back(text.substr(start, i - start));
  }
  return parts;
}

}  // namespace moslim
