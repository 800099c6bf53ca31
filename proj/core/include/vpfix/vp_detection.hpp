#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vpfix/edge_analysis.hpp"
#include "vpfix/geometry.hpp"

namespace vpfix {

struct DetectedSegment {
  LineSegment seg;
  /// Number of edge pixels supporting the segment.
  int support = 0;
  double mean_magnitude = 0.0;
};

struct VpCandidate {
  HomogeneousPoint vp;
  /// Indices into the segment list passed to detect_vps, ascending.
  std::vector<std::size_t> inliers;
  /// Sum of inlier segment lengths.
  double score = 0.0;
};

struct RansacConfig {
  int iterations = 2000;
  double consensus_angle = deg_to_rad(2.0);
  int max_vps = 3;
  int min_inliers = 4;
  double min_segment_length = 20.0;
  double magnitude_quantile = 0.9;
  std::uint64_t rng_seed = 42;

  void validate() const;
  /// Stable fingerprint of all fields, used as a cache key.
  std::string fingerprint() const;
};

/// Region-grows edge pixels with consistent orientation into straight segments.
/// Deterministic for a given field and config.
std::vector<DetectedSegment> extract_segments(const EdgeField& ef, const RansacConfig& cfg);

/// Sequential two-segment RANSAC over line intersections. Candidates are sorted by
/// score, descending; inlier sets are disjoint.
std::vector<VpCandidate> detect_vps(const std::vector<DetectedSegment>& segments,
                                    const RansacConfig& cfg);

/// Convenience: sobel -> extract_segments -> detect_vps on a grayscale image.
std::vector<VpCandidate> detect_vps_in_image(const ScalarField& gray, const RansacConfig& cfg);

/// True when `seg` counts as an inlier of `vp` at the given angular tolerance.
bool is_consensus_inlier(const LineSegment& seg, const HomogeneousPoint& vp,
                         double consensus_angle);

}  // namespace vpfix
