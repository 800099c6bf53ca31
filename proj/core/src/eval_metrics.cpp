#include "vpfix/eval_metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "vpfix/error.hpp"

namespace vpfix {

double image_angle_error(const std::vector<HomogeneousPoint>& detected,
                         const HomogeneousPoint& target, const CameraIntrinsics& k) {
  k.validate();
  if (detected.empty()) throw Error(ErrorCode::kNoDetections, "detector returned no VPs");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& d : detected) best = std::min(best, camera_angle_error(k, d, target));
  return rad_to_deg(best);
}

std::vector<double> angle_accuracy(const std::vector<double>& errors_deg,
                                   const std::vector<double>& thresholds_deg) {
  if (errors_deg.empty()) throw Error(ErrorCode::kEmptyInput, "no errors to aggregate");
  for (std::size_t i = 0; i < thresholds_deg.size(); ++i) {
    if (!(thresholds_deg[i] > 0.0) || (i > 0 && !(thresholds_deg[i] > thresholds_deg[i - 1]))) {
      throw Error(ErrorCode::kInvalidArgument, "thresholds must be positive and ascending");
    }
  }
  std::vector<double> out;
  for (double tau : thresholds_deg) {
    std::size_t below = 0;
    for (double e : errors_deg) below += e < tau ? 1 : 0;
    out.push_back(static_cast<double>(below) / static_cast<double>(errors_deg.size()));
  }
  return out;
}

BestOfK best_of_k_select(const std::vector<ScalarField>& candidates,
                         const HomogeneousPoint& target, const VpDetector& detector,
                         const CameraIntrinsics& k) {
  if (candidates.empty()) throw Error(ErrorCode::kEmptyInput, "no candidate images");
  BestOfK best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto vps = detector(candidates[i]);
    const double err = vps.empty() ? kNoDetectionErrorDeg : image_angle_error(vps, target, k);
    if (err < best.error_deg) best = {i, err};
  }
  return best;
}

std::optional<double> psnr(const std::vector<ScalarField>& a, const std::vector<ScalarField>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "PSNR inputs need the same non-zero channel count");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (!a[c].same_shape(b[c])) throw Error(ErrorCode::kShapeMismatch, "PSNR channel shapes differ");
    for (std::size_t i = 0; i < a[c].size(); ++i) {
      const double d = a[c].data()[i] - b[c].data()[i];
      sum += d * d;
    }
    n += a[c].size();
  }
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "PSNR of empty images");
  const double mse = sum / static_cast<double>(n);
  if (mse == 0.0) return std::nullopt;
  return 10.0 * std::log10(1.0 / mse);
}

AAReport make_aa_report(std::vector<ImageResult> per_image, std::vector<double> thresholds_deg,
                        std::string detector) {
  AAReport report;
  report.thresholds_deg = std::move(thresholds_deg);
  report.detector = std::move(detector);
  std::vector<double> errors;
  for (const auto& r : per_image) errors.push_back(r.min_error_deg);
  const auto fractions = angle_accuracy(errors, report.thresholds_deg);
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    report.aa_at[report.thresholds_deg[i]] = fractions[i];
  }
  double sum = 0.0;
  for (double e : errors) sum += e;
  report.mean_error_deg = sum / static_cast<double>(errors.size());
  report.intrinsics = per_image.front().intrinsics;
  for (const auto& r : per_image) {
    const auto& k = r.intrinsics;
    const auto& f = *report.intrinsics;
    if (k.fx != f.fx || k.fy != f.fy || k.cx != f.cx || k.cy != f.cy) {
      report.intrinsics.reset();
      break;
    }
  }
  report.per_image = std::move(per_image);
  return report;
}

std::string aa_report_csv(const AAReport& report) {
  std::ostringstream os;
  os.precision(10);
  os << "image_id,min_error_deg,detector,no_detections,fx,fy,cx,cy\n";
  for (const auto& r : report.per_image) {
    os << r.image_id << ',' << r.min_error_deg << ',' << r.detector << ','
       << (r.no_detections ? "true" : "false") << ',' << r.intrinsics.fx << ','
       << r.intrinsics.fy << ',' << r.intrinsics.cx << ',' << r.intrinsics.cy << '\n';
  }
  return os.str();
}

}  // namespace vpfix
