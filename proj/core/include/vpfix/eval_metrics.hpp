#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vpfix/geometry.hpp"
#include "vpfix/image.hpp"

namespace vpfix {

/// Error recorded for images where the detector finds nothing.
inline constexpr double kNoDetectionErrorDeg = 90.0;

/// Smallest camera-space angle between any detection and the target, in degrees.
/// Throws NoDetections when `detected` is empty.
double image_angle_error(const std::vector<HomogeneousPoint>& detected,
                         const HomogeneousPoint& target, const CameraIntrinsics& k);

/// Fraction of errors strictly below each threshold. Thresholds must be positive and
/// ascending. Throws EmptyInput on an empty error list.
std::vector<double> angle_accuracy(const std::vector<double>& errors_deg,
                                   const std::vector<double>& thresholds_deg);

/// Runs a detector on an image and returns its VPs.
using VpDetector = std::function<std::vector<HomogeneousPoint>(const ScalarField&)>;

struct BestOfK {
  std::size_t index = 0;
  double error_deg = 0.0;
};

/// Candidate whose detections come closest to the target; ties go to the lowest index.
BestOfK best_of_k_select(const std::vector<ScalarField>& candidates,
                         const HomogeneousPoint& target, const VpDetector& detector,
                         const CameraIntrinsics& k);

/// 10 log10(1 / MSE) over all channels; empty for identical inputs.
std::optional<double> psnr(const std::vector<ScalarField>& a, const std::vector<ScalarField>& b);

struct ImageResult {
  std::string image_id;
  double min_error_deg = 0.0;
  std::string detector;
  bool no_detections = false;
  CameraIntrinsics intrinsics;
};

struct AAReport {
  std::vector<double> thresholds_deg{3.0, 5.0, 10.0};
  std::vector<ImageResult> per_image;
  std::map<double, double> aa_at;
  double mean_error_deg = 0.0;
  /// Detector label, e.g. "ransac".
  std::string detector;
  /// Set when every image shares the same intrinsics.
  std::optional<CameraIntrinsics> intrinsics;
};

/// Aggregates per-image errors into AA fractions and the mean error.
AAReport make_aa_report(std::vector<ImageResult> per_image, std::vector<double> thresholds_deg,
                        std::string detector);

/// One CSV row per image: image_id,min_error_deg,detector,no_detections,fx,fy,cx,cy.
std::string aa_report_csv(const AAReport& report);

}  // namespace vpfix
