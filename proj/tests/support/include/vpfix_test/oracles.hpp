#pragma once

#include <functional>
#include <vector>

#include "vpfix/edge_analysis.hpp"
#include "vpfix/mask_builder.hpp"
#include "vpfix/dataset_pipeline.hpp"

// Deliberately naive reference implementations. None of them call into the code
// under test except for plain value types.
namespace vpfix::test {

/// VP alignment score as a literal double loop: 3x3 Sobel with clamped reads, then
/// theta = acos(|d . v|) and w = 1 / (1 + exp(-k (theta_t - theta))).
double naive_alignment_score(const ScalarField& img, const HomogeneousPoint& vp,
                             const VpLossConfig& cfg);

/// Mean over VPs of (S_gt - S_pred)^2 with naive_alignment_score.
double naive_vp_loss(const ScalarField& pred, const ScalarField& gt,
                     const std::vector<HomogeneousPoint>& vps, const VpLossConfig& cfg);

/// Central difference of `f` with respect to pixel `index` of `img`.
double central_difference(const std::function<double(const ScalarField&)>& f,
                          const ScalarField& img, std::size_t index, double h);

/// Largest distance from any input vertex to the polyline `simplified`.
double max_vertex_deviation(const std::vector<Point2>& input, const std::vector<Point2>& simplified);

/// Pixel-center sampling of a polygon with the crossing-number rule; centers on an
/// edge count as inside.
Bitmap center_sampled_polygon(const std::vector<Point2>& poly, int width, int height);

/// Dilation by brute force over every pair of pixels.
Bitmap brute_force_dilate(const Bitmap& mask, int radius);

}  // namespace vpfix::test
