#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ipcnn {

enum class ErrorCode {
  kFileMissing,
  kSizeMismatch,
  kMalformedPgmHeader,
  kOutOfBounds,
  kInvalidMode,
  kContextUnavailable,
  kEmptyCorpus,
  kChannelMismatch,
  kShapeMismatch,
  kBatchTooSmall,
  kDatasetEmpty,
  kMagicMismatch,
  kVersionMismatch,
  kTruncatedFile,
  kInvalidConfig,
  kUnregisteredQp,
  kQpMismatch,
  kIoFailure,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; code() identifies the
// failure class, what() carries a message naming the offending file or flag.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ipcnn
