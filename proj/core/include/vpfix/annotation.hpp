#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vpfix/geometry.hpp"
#include "vpfix/mask_builder.hpp"
#include "vpfix/serialization.hpp"

namespace vpfix {

inline constexpr int kAnnotationSchemaVersion = 1;
inline constexpr int kMaxDilationPx = 64;

/// One image's correction request: the target VP and the outlines to move.
struct AnnotationRecord {
  int schema_version = kAnnotationSchemaVersion;
  std::string image_id;
  int width = 0;
  int height = 0;
  HomogeneousPoint target_vp{0.0, 0.0, 1.0};
  std::vector<OutlinePair> pairs;
  int dilation_px = 5;
  std::string prompt;
  /// UTC ISO-8601, set by the store.
  std::string created_at;
  std::string updated_at;
  /// Fraction of the image covered by the mask, set by the store.
  std::optional<double> mask_coverage;

  bool complete() const { return !pairs.empty(); }
};

/// Parses and validates a record. Collects every problem and throws ValidationFailed
/// with one detail per offending field. Timestamps and mask_coverage are optional.
AnnotationRecord annotation_from_json(const Json& j);

/// Structural checks on an already-built record (same rules as annotation_from_json).
void validate_annotation(const AnnotationRecord& record);

Json to_json(const AnnotationRecord& record);

/// Equality of user-supplied content; ignores timestamps and mask_coverage.
bool same_content(const AnnotationRecord& a, const AnnotationRecord& b);

}  // namespace vpfix
