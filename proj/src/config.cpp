#include "moslim/config.hpp"

#include <cctype>
#include <cstdlib>

#include "moslim/error.hpp"
#include "moslim/util.hpp"

namespace moslim {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_resource_key(const std::string& key) {
  if (key == "workers" || key == "no_timestamp") return true;
  return key.size() >= 5 && key.compare(key.size() - 5, 5, "_path") == 0;
}

}  // namespace

FlatConfig FlatConfig::parse(std::string_view text) {
  FlatConfig cfg;
  std::size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    auto line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCode::ConfigInvalid, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    std::string value = trim(std::string_view(stripped).substr(eq + 1));
    // Tolerate quoted strings.
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) raise(ErrorCode::ConfigInvalid, "line " + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

FlatConfig FlatConfig::load(const std::string& path) { return parse(read_file(path)); }

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long FlatConfig::get_int(const std::string& key, long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  const long v = std::strtol(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0') {
    raise(ErrorCode::ConfigInvalid, "key '" + key + "' is not an integer: " + it->second);
  }
  return v;
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0') {
    raise(ErrorCode::ConfigInvalid, "key '" + key + "' is not a number: " + it->second);
  }
  return v;
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  raise(ErrorCode::ConfigInvalid, "key '" + key + "' is not a boolean: " + it->second);
}

std::string FlatConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

std::string FlatConfig::semantic_hash() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    if (is_resource_key(k)) continue;
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return to_hex(fnv1a(out));
}

}  // namespace moslim
