#include "vpfix/edge_analysis.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "detail/summation.hpp"
#include "vpfix/error.hpp"

namespace vpfix {
namespace {

// kSobelX[dy + 1][dx + 1]; kSobelY is its transpose.
constexpr std::array<std::array<double, 3>, 3> kSobelX{{{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}}};
constexpr std::array<std::array<double, 3>, 3> kSobelY{{{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}}};

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

// Per-pixel VP direction: computed once for points at infinity.
class VpDirections {
 public:
  explicit VpDirections(const HomogeneousPoint& vp) : vp_(vp) {
    if (vp.w() == 0.0) fixed_ = vp_direction_at(vp, {0.0, 0.0});
  }

  std::optional<UnitVector2> at(int x, int y) const {
    if (fixed_) return fixed_;
    try {
      return vp_direction_at(vp_, {static_cast<double>(x), static_cast<double>(y)});
    } catch (const Error&) {
      return std::nullopt;
    }
  }

 private:
  HomogeneousPoint vp_;
  std::optional<UnitVector2> fixed_;
};

struct Contribution {
  double value = 0.0;
  double d_gx = 0.0;
  double d_gy = 0.0;
};

// M * w for one pixel and its partials with respect to (gx, gy). Caller applies the gate.
//
// With a = g_perp . v and b = g . v, the undirected angle is atan2(|b|, |a|); this equals
// acos(|d . v|) but stays differentiable near zero. For unit v, a^2 + b^2 = M^2.
Contribution contribution(double gx, double gy, double m, const UnitVector2& v,
                          const VpLossConfig& cfg, bool want_grad) {
  const double a = -gy * v.dx() + gx * v.dy();
  Contribution c;
  if (cfg.weighting_mode == WeightingMode::kDotProduct) {
    c.value = std::abs(a);
    if (want_grad) {
      c.d_gx = sign(a) * v.dy();
      c.d_gy = -sign(a) * v.dx();
    }
    return c;
  }
  const double b = gx * v.dx() + gy * v.dy();
  const double abs_a = std::abs(a);
  const double abs_b = std::abs(b);
  const double theta = std::atan2(abs_b, abs_a);
  const double s = sigmoid(cfg.sigmoid_steepness * (cfg.theta_thresh - theta));
  c.value = m * s;
  if (want_grad) {
    const double m2 = m * m;
    const double dtheta_dgx = (abs_a * sign(b) * v.dx() - abs_b * sign(a) * v.dy()) / m2;
    const double dtheta_dgy = (abs_a * sign(b) * v.dy() + abs_b * sign(a) * v.dx()) / m2;
    const double ds_dtheta = -cfg.sigmoid_steepness * s * (1.0 - s);
    c.d_gx = (gx / m) * s + m * ds_dtheta * dtheta_dgx;
    c.d_gy = (gy / m) * s + m * ds_dtheta * dtheta_dgy;
  }
  return c;
}

void require_same_shape(const ScalarField& a, const ScalarField& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kShapeMismatch, "predicted and ground-truth images differ in size");
  }
}

double score_scale(const EdgeField& ef, const VpLossConfig& cfg) {
  if (!cfg.normalize_by_pixel_count) return 1.0;
  return 1.0 / static_cast<double>(ef.gx.size());
}

}  // namespace

std::string_view to_string(WeightingMode mode) {
  return mode == WeightingMode::kDotProduct ? "dot_product" : "sigmoid_threshold";
}

WeightingMode parse_weighting_mode(std::string_view text) {
  if (text == "sigmoid" || text == "sigmoid_threshold") return WeightingMode::kSigmoidThreshold;
  if (text == "dot" || text == "dot_product") return WeightingMode::kDotProduct;
  throw Error(ErrorCode::kInvalidArgument, "unknown weighting mode '" + std::string(text) + "'");
}

void VpLossConfig::validate() const {
  const double half_pi = std::acos(0.0);
  if (!(theta_thresh > 0.0 && theta_thresh < half_pi)) {
    throw Error(ErrorCode::kInvalidArgument, "theta_thresh must lie in (0, pi/2)");
  }
  if (!(sigmoid_steepness > 0.0) || !std::isfinite(sigmoid_steepness)) {
    throw Error(ErrorCode::kInvalidArgument, "sigmoid steepness must be positive");
  }
  if (!(magnitude_epsilon > 0.0) || !std::isfinite(magnitude_epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "magnitude epsilon must be positive");
  }
}

EdgeField sobel(const ScalarField& img) {
  const int w = img.width();
  const int h = img.height();
  if (w < 3 || h < 3) {
    throw Error(ErrorCode::kImageTooSmall, "Sobel needs at least a 3x3 image, got " +
                                               std::to_string(w) + "x" + std::to_string(h));
  }
  EdgeField ef{ScalarField(w, h), ScalarField(w, h), ScalarField(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto v = [&](int dx, int dy) { return img.clamped(x + dx, y + dy); };
      // Side sums are formed first so a constant neighbourhood cancels exactly.
      const double gx = (v(1, -1) + 2.0 * v(1, 0) + v(1, 1)) - (v(-1, -1) + 2.0 * v(-1, 0) + v(-1, 1));
      const double gy = (v(-1, 1) + 2.0 * v(0, 1) + v(1, 1)) - (v(-1, -1) + 2.0 * v(0, -1) + v(1, -1));
      ef.gx.at(x, y) = gx;
      ef.gy.at(x, y) = gy;
      ef.magnitude.at(x, y) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return ef;
}

UnitVector2 edge_direction_at(const EdgeField& ef, int x, int y, double magnitude_epsilon) {
  const double m = ef.magnitude.at(x, y);
  if (!(m >= magnitude_epsilon)) {
    throw Error(ErrorCode::kFlatRegion, "edge direction undefined in a flat region");
  }
  return UnitVector2::from(-ef.gy.at(x, y) / m, ef.gx.at(x, y) / m);
}

double vp_alignment_score(const EdgeField& ef, const HomogeneousPoint& vp,
                          const VpLossConfig& cfg) {
  const VpDirections dirs(vp);
  std::vector<double> terms(ef.gx.size(), 0.0);
  const int w = ef.width();
  for (int y = 0; y < ef.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = ef.magnitude.at(x, y);
      if (!(m >= cfg.magnitude_epsilon)) continue;
      const auto v = dirs.at(x, y);
      if (!v) continue;
      terms[static_cast<std::size_t>(y) * w + x] =
          contribution(ef.gx.at(x, y), ef.gy.at(x, y), m, *v, cfg, false).value;
    }
  }
  return detail::pairwise_sum(terms) * score_scale(ef, cfg);
}

VpScoreReport vp_loss(const ScalarField& pred, const ScalarField& gt,
                      const std::vector<HomogeneousPoint>& vps, const VpLossConfig& cfg) {
  cfg.validate();
  require_same_shape(pred, gt);
  if (vps.empty()) throw Error(ErrorCode::kEmptyVpSet, "VP loss needs at least one VP");
  const EdgeField ef_pred = sobel(pred);
  const EdgeField ef_gt = sobel(gt);
  VpScoreReport report{vps, {}, {}, 0.0, cfg};
  std::vector<double> sq;
  for (const auto& vp : vps) {
    const double sp = vp_alignment_score(ef_pred, vp, cfg);
    const double sg = vp_alignment_score(ef_gt, vp, cfg);
    report.scores_pred.push_back(sp);
    report.scores_gt.push_back(sg);
    sq.push_back((sg - sp) * (sg - sp));
  }
  report.loss = detail::pairwise_sum(sq) / static_cast<double>(vps.size());
  return report;
}

ScalarField vp_loss_gradient(const ScalarField& pred, const ScalarField& gt,
                             const std::vector<HomogeneousPoint>& vps, const VpLossConfig& cfg) {
  const VpScoreReport report = vp_loss(pred, gt, vps, cfg);
  const EdgeField ef = sobel(pred);
  const int w = ef.width();
  const int h = ef.height();
  const double n = static_cast<double>(vps.size());
  const double scale = score_scale(ef, cfg);

  // Upstream gradient with respect to the Sobel outputs.
  ScalarField d_gx(w, h);
  ScalarField d_gy(w, h);
  for (std::size_t i = 0; i < vps.size(); ++i) {
    const double coeff = 2.0 / n * (report.scores_pred[i] - report.scores_gt[i]) * scale;
    if (coeff == 0.0) continue;
    const VpDirections dirs(vps[i]);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double m = ef.magnitude.at(x, y);
        if (!(m >= cfg.magnitude_epsilon)) continue;
        const auto v = dirs.at(x, y);
        if (!v) continue;
        const Contribution c = contribution(ef.gx.at(x, y), ef.gy.at(x, y), m, *v, cfg, true);
        d_gx.at(x, y) += coeff * c.d_gx;
        d_gy.at(x, y) += coeff * c.d_gy;
      }
    }
  }

  // Transposed Sobel: scatter through the same clamped taps used in the forward pass.
  ScalarField grad(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double ux = d_gx.at(x, y);
      const double uy = d_gy.at(x, y);
      if (ux == 0.0 && uy == 0.0) continue;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int sx = std::clamp(x + dx, 0, w - 1);
          const int sy = std::clamp(y + dy, 0, h - 1);
          grad.at(sx, sy) += kSobelX[dy + 1][dx + 1] * ux + kSobelY[dy + 1][dx + 1] * uy;
        }
      }
    }
  }
  return grad;
}

double total_loss(double l_cn, double l_vp, double lambda) {
  if (!(l_cn >= 0.0) || !(l_vp >= 0.0) || !(lambda >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "loss terms and lambda must be non-negative");
  }
  return l_cn + lambda * l_vp;
}

}  // namespace vpfix
