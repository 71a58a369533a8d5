#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace moslim {

/// Checkpoint framing shared by reward models and policies: one JSON header
/// line followed by the raw little-endian 64-bit float parameter array in
/// declared order. `param_count` in the header is authoritative.
struct Checkpoint {
  nlohmann::json header;
  std::vector<double> params;
};

std::string checkpoint_to_bytes(const Checkpoint& ckpt);
Checkpoint checkpoint_from_bytes(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// RFC3339-ish UTC timestamp. Omitted from headers when with_timestamp is
/// false so byte-level reproducibility checks can compare whole files.
std::string utc_timestamp();

/// Adds shared provenance fields (config_hash, optional timestamp).
void stamp_header(nlohmann::json& header, const std::string& config_hash, bool with_timestamp);

}  // namespace moslim
