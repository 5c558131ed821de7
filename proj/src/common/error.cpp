#include "ipcnn/error.hpp"

namespace ipcnn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileMissing: return "file-missing";
    case ErrorCode::kSizeMismatch: return "size-mismatch";
    case ErrorCode::kMalformedPgmHeader: return "malformed-pgm-header";
    case ErrorCode::kOutOfBounds: return "out-of-bounds";
    case ErrorCode::kInvalidMode: return "invalid-mode";
    case ErrorCode::kContextUnavailable: return "context-unavailable";
    case ErrorCode::kEmptyCorpus: return "empty-corpus";
    case ErrorCode::kChannelMismatch: return "channel-mismatch";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kBatchTooSmall: return "batch-too-small";
    case ErrorCode::kDatasetEmpty: return "dataset-empty";
    case ErrorCode::kMagicMismatch: return "magic-mismatch";
    case ErrorCode::kVersionMismatch: return "version-mismatch";
    case ErrorCode::kTruncatedFile: return "truncated-file";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kUnregisteredQp: return "unregistered-qp";
    case ErrorCode::kQpMismatch: return "qp-mismatch";
    case ErrorCode::kIoFailure: return "io-failure";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

}  // namespace ipcnn
