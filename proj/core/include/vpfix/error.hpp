#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vpfix {

enum class ErrorCode {
  kDegenerateDirection,
  kIdenticalLines,
  kChannelMismatch,
  kImageTooSmall,
  kFlatRegion,
  kEmptyVpSet,
  kDegenerateRegion,
  kShapeMismatch,
  kTimestepOutOfRange,
  kMaskNotBinary,
  kPredictorShapeMismatch,
  kInvalidSchedule,
  kNoDetections,
  kEmptyInput,
  kInvalidArgument,
  kNotFound,
  kValidationFailed,
  kConflict,
  kPreconditionRequired,
  kIncompleteAnnotation,
  kStoreUnavailable,
  kIo,
  kFormat,
  kInternal,
};

/// Stable snake_case identifier used in JSON error payloads.
std::string_view error_code_name(ErrorCode code) noexcept;

/// Broad class of an error, used by the CLI to pick an exit code.
enum class ErrorKind { kValidation, kIo, kInternal };

ErrorKind error_kind(ErrorCode code) noexcept;

/// One offending field (or id) behind a validation-style error.
struct ErrorDetail {
  std::string field;
  std::string message;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<ErrorDetail> details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<ErrorDetail>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<ErrorDetail> details_;
};

}  // namespace vpfix
