#include "vpfix/error.hpp"

namespace vpfix {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kDegenerateDirection: return "degenerate_direction";
    case ErrorCode::kIdenticalLines: return "identical_lines";
    case ErrorCode::kChannelMismatch: return "channel_mismatch";
    case ErrorCode::kImageTooSmall: return "image_too_small";
    case ErrorCode::kFlatRegion: return "flat_region";
    case ErrorCode::kEmptyVpSet: return "empty_vp_set";
    case ErrorCode::kDegenerateRegion: return "degenerate_region";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kTimestepOutOfRange: return "timestep_out_of_range";
    case ErrorCode::kMaskNotBinary: return "mask_not_binary";
    case ErrorCode::kPredictorShapeMismatch: return "predictor_shape_mismatch";
    case ErrorCode::kInvalidSchedule: return "invalid_schedule";
    case ErrorCode::kNoDetections: return "no_detections";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kValidationFailed: return "validation_failed";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kPreconditionRequired: return "precondition_required";
    case ErrorCode::kIncompleteAnnotation: return "incomplete_annotation";
    case ErrorCode::kStoreUnavailable: return "store_unavailable";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kFormat: return "format_error";
    case ErrorCode::kInternal: return "internal_error";
  }
  return "internal_error";
}

ErrorKind error_kind(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kNotFound:
    case ErrorCode::kStoreUnavailable:
      return ErrorKind::kIo;
    case ErrorCode::kInternal:
      return ErrorKind::kInternal;
    default:
      return ErrorKind::kValidation;
  }
}

}  // namespace vpfix
