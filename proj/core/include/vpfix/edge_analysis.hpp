#pragma once

#include <string_view>
#include <vector>

#include "vpfix/geometry.hpp"
#include "vpfix/image.hpp"

namespace vpfix {

/// Sobel response of an image: horizontal/vertical gradients and their magnitude.
struct EdgeField {
  ScalarField gx;
  ScalarField gy;
  ScalarField magnitude;

  int width() const { return gx.width(); }
  int height() const { return gx.height(); }
};

enum class WeightingMode {
  /// w = sigmoid(k * (theta_thresh - theta)); emphasizes edges within the threshold.
  kSigmoidThreshold,
  /// w = |d . v|; every edge weighted by its alignment cosine.
  kDotProduct,
};

std::string_view to_string(WeightingMode mode);
/// Accepts "sigmoid", "sigmoid_threshold", "dot", "dot_product".
WeightingMode parse_weighting_mode(std::string_view text);

struct VpLossConfig {
  double theta_thresh = deg_to_rad(5.0);
  double sigmoid_steepness = 50.0;
  double magnitude_epsilon = 1e-4;
  WeightingMode weighting_mode = WeightingMode::kSigmoidThreshold;
  /// Divide each score by the pixel count.
  bool normalize_by_pixel_count = false;

  /// Throws InvalidArgument on out-of-range values.
  void validate() const;
};

/// Per-VP scores of a predicted and a ground-truth image, plus their loss.
struct VpScoreReport {
  std::vector<HomogeneousPoint> vps;
  std::vector<double> scores_pred;
  std::vector<double> scores_gt;
  double loss = 0.0;
  VpLossConfig config;
};

/// 3x3 Sobel with replicate padding; gx grows to the right, gy downward.
/// Throws ImageTooSmall when either dimension is below 3.
EdgeField sobel(const ScalarField& img);

/// Unit edge direction (-gy, gx) / M at pixel (x, y). Throws FlatRegion below `magnitude_epsilon`.
UnitVector2 edge_direction_at(const EdgeField& ef, int x, int y, double magnitude_epsilon);

/// Sum over gated edge pixels of magnitude times the alignment weight toward `vp`.
double vp_alignment_score(const EdgeField& ef, const HomogeneousPoint& vp,
                          const VpLossConfig& cfg);

/// Mean squared difference of per-VP scores between `pred` and `gt`.
VpScoreReport vp_loss(const ScalarField& pred, const ScalarField& gt,
                      const std::vector<HomogeneousPoint>& vps, const VpLossConfig& cfg);

/// Analytic d(vp_loss)/d(pred[p]) for every pixel.
ScalarField vp_loss_gradient(const ScalarField& pred, const ScalarField& gt,
                             const std::vector<HomogeneousPoint>& vps, const VpLossConfig& cfg);

/// l_cn + lambda * l_vp; throws InvalidArgument on negative inputs.
double total_loss(double l_cn, double l_vp, double lambda);

}  // namespace vpfix
