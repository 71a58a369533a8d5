#pragma once

#include <stdexcept>
#include <string>

namespace moslim {

enum class ErrorCode {
  MalformedTag,
  IntensityOutOfRange,
  DuplicateDimension,
  UnknownToken,
  RawOutOfRange,
  InvalidCount,
  InvalidArgument,
  ShapeMismatch,
  NotOneHot,
  SchemeMismatch,
  EmptyDataset,
  NotCalibrated,
  EmptySpec,
  EmptyBatch,
  GroupTooSmall,
  BadWeights,
  WeightMismatch,
  ConfigInvalid,
  IoFailure,
  DegenerateDim,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedTag: return "MalformedTag";
    case ErrorCode::IntensityOutOfRange: return "IntensityOutOfRange";
    case ErrorCode::DuplicateDimension: return "DuplicateDimension";
    case ErrorCode::UnknownToken: return "UnknownToken";
    case ErrorCode::RawOutOfRange: return "RawOutOfRange";
    case ErrorCode::InvalidCount: return "InvalidCount";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotOneHot: return "NotOneHot";
    case ErrorCode::SchemeMismatch: return "SchemeMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NotCalibrated: return "NotCalibrated";
    case ErrorCode::EmptySpec: return "EmptySpec";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::GroupTooSmall: return "GroupTooSmall";
    case ErrorCode::BadWeights: return "BadWeights";
    case ErrorCode::WeightMismatch: return "WeightMismatch";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DegenerateDim: return "DegenerateDim";
  }
  return "Unknown";
}

/// Library-wide exception type. `code()` identifies the failure class so
/// callers (and tests) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace moslim
