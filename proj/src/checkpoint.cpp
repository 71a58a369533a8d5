#include "moslim/checkpoint.hpp"

#include <cstring>
#include <ctime>

#include "moslim/error.hpp"
#include "moslim/util.hpp"

namespace moslim {

std::string checkpoint_to_bytes(const Checkpoint& ckpt) {
  nlohmann::json header = ckpt.header;
  header["param_count"] = ckpt.params.size();
  std::string out = header.dump();
  out += '\n';
  // Raw little-endian doubles. This build targets little-endian hosts; the
  // loader round-trips on the same convention.
  const auto* bytes = reinterpret_cast<const char*>(ckpt.params.data());
  out.append(bytes, ckpt.params.size() * sizeof(double));
  return out;
}

Checkpoint checkpoint_from_bytes(const std::string& bytes) {
  const auto newline = bytes.find('\n');
  if (newline == std::string::npos) raise(ErrorCode::IoFailure, "checkpoint missing header line");
  Checkpoint ckpt;
  ckpt.header = nlohmann::json::parse(bytes.substr(0, newline), nullptr, false);
  if (ckpt.header.is_discarded() || !ckpt.header.is_object()) {
    raise(ErrorCode::IoFailure, "checkpoint header is not a JSON object");
  }
  const auto count = ckpt.header.at("param_count").get<std::size_t>();
  const std::size_t payload = bytes.size() - newline - 1;
  if (payload != count * sizeof(double)) {
    raise(ErrorCode::IoFailure, "checkpoint payload size mismatch");
  }
  ckpt.params.resize(count);
  std::memcpy(ckpt.params.data(), bytes.data() + newline + 1, payload);
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  write_file(path, checkpoint_to_bytes(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  return checkpoint_from_bytes(read_file(path));
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void stamp_header(nlohmann::json& header, const std::string& config_hash, bool with_timestamp) {
  header["config_hash"] = config_hash;
  if (with_timestamp) header["timestamp"] = utc_timestamp();
}

}  // namespace moslim
