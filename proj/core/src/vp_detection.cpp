#include "vpfix/vp_detection.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "detail/rng.hpp"
#include "vpfix/error.hpp"

namespace vpfix {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRegionAngleTolerance = deg_to_rad(10.0);
constexpr double kMinRegionAngleTolerance = deg_to_rad(2.0);
// Weighted RMS offset of a straight anti-aliased line's Sobel response is about 1.2 px.
constexpr double kMaxRegionSpread = 1.6;
constexpr double kMaxSpreadRange = 0.5;
constexpr int kTensorRadius = 2;
constexpr double kExtentWeightFraction = 0.5;
constexpr int kRegionNeighborhood = 2;  // Chebyshev radius; bridges the zero-response core of 1 px lines.
constexpr double kRelativeMagnitudeFloor = 0.05;
constexpr double kMergeAngle = deg_to_rad(3.0);
constexpr double kMergeOffset = 2.0;
constexpr double kMergeGap = 10.0;
constexpr int kMinRegionPixels = 3;
constexpr int kRefineRounds = 3;
constexpr int kRobustRounds = 5;
constexpr double kRobustScale = deg_to_rad(0.5);

struct Pixel {
  int x;
  int y;
  double weight;
};

struct Region {
  std::vector<Pixel> pixels;
  // Weighted total-least-squares fit.
  Point2 center;
  Point2 direction;
  double t_min = 0.0;
  double t_max = 0.0;
  // Weighted RMS distance of the pixels from the fitted line.
  double spread = 0.0;
  // Largest minus smallest spread over the three thirds of the extent.
  double spread_range = 0.0;

  double length() const { return t_max - t_min; }
  Point2 p0() const { return center + t_min * direction; }
  Point2 p1() const { return center + t_max * direction; }
};

// Orientation of the undirected line, in [0, pi).
double orientation(double angle) {
  double a = std::fmod(angle, kPi);
  if (a < 0.0) a += kPi;
  return a;
}

double orientation_gap(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, kPi - d);
}

void fit(Region& r) {
  double sw = 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : r.pixels) {
    sw += p.weight;
    mx += p.weight * p.x;
    my += p.weight * p.y;
  }
  mx /= sw;
  my /= sw;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& p : r.pixels) {
    const double dx = p.x - mx;
    const double dy = p.y - my;
    sxx += p.weight * dx * dx;
    sxy += p.weight * dx * dy;
    syy += p.weight * dy * dy;
  }
  // Major axis of the 2x2 scatter matrix.
  const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  r.center = {mx, my};
  r.direction = {std::cos(angle), std::sin(angle)};
  double sq = 0.0;
  for (const auto& p : r.pixels) {
    const double off = cross(r.direction, Point2{p.x - mx, p.y - my});
    sq += p.weight * off * off;
  }
  r.spread = std::sqrt(sq / sw);
  // Spread per third of the extent; a straight band keeps it constant.
  {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (const auto& p : r.pixels) {
      const double t = dot(Point2{p.x - mx, p.y - my}, r.direction);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    std::array<double, 3> w3{};
    std::array<double, 3> s3{};
    for (const auto& p : r.pixels) {
      const Point2 d{p.x - mx, p.y - my};
      const double t = dot(d, r.direction);
      const int k = std::min(2, static_cast<int>(3.0 * (t - lo) / std::max(hi - lo, 1e-9)));
      const double off = cross(r.direction, d);
      w3[k] += p.weight;
      s3[k] += p.weight * off * off;
    }
    double smin = INFINITY;
    double smax = 0.0;
    for (int k = 0; k < 3; ++k) {
      if (w3[k] <= 0.0) continue;
      const double v = std::sqrt(s3[k] / w3[k]);
      smin = std::min(smin, v);
      smax = std::max(smax, v);
    }
    r.spread_range = smax - smin;
  }
  r.t_min = std::numeric_limits<double>::infinity();
  r.t_max = -std::numeric_limits<double>::infinity();
  double w_max = 0.0;
  for (const auto& p : r.pixels) w_max = std::max(w_max, p.weight);
  // Extent from the stronger pixels only; the weak Sobel tail at line caps overshoots.
  for (const auto& p : r.pixels) {
    if (p.weight < kExtentWeightFraction * w_max) continue;
    const double t = dot(Point2{p.x - mx, p.y - my}, r.direction);
    r.t_min = std::min(r.t_min, t);
    r.t_max = std::max(r.t_max, t);
  }
}

double line_offset(const Region& r, Point2 p) { return std::abs(cross(r.direction, p - r.center)); }

bool mergeable(const Region& a, const Region& b) {
  const double ga = std::atan2(a.direction.y, a.direction.x);
  const double gb = std::atan2(b.direction.y, b.direction.x);
  if (orientation_gap(orientation(ga), orientation(gb)) > kMergeAngle) return false;
  if (line_offset(a, b.p0()) > kMergeOffset || line_offset(a, b.p1()) > kMergeOffset) return false;
  if (line_offset(b, a.p0()) > kMergeOffset || line_offset(b, a.p1()) > kMergeOffset) return false;
  // Gap between the two intervals along a's direction.
  const double s0 = dot(b.p0() - a.center, a.direction);
  const double s1 = dot(b.p1() - a.center, a.direction);
  const double lo = std::min(s0, s1);
  const double hi = std::max(s0, s1);
  const double gap = std::max(lo - a.t_max, a.t_min - hi);
  return gap <= kMergeGap;
}

// Edge orientation from the gradient structure tensor summed over a square window.
// Stable on aliased staircase lines where per-pixel Sobel angles scatter.
std::vector<double> tensor_orientation(const EdgeField& ef) {
  const int w = ef.width();
  const int h = ef.height();
  std::vector<double> out(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double jxx = 0.0;
      double jxy = 0.0;
      double jyy = 0.0;
      for (int dy = -kTensorRadius; dy <= kTensorRadius; ++dy) {
        for (int dx = -kTensorRadius; dx <= kTensorRadius; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const double gx = ef.gx.at(nx, ny);
          const double gy = ef.gy.at(nx, ny);
          jxx += gx * gx;
          jxy += gx * gy;
          jyy += gy * gy;
        }
      }
      const double gradient = 0.5 * std::atan2(2.0 * jxy, jxx - jyy);
      out[static_cast<std::size_t>(y) * w + x] = orientation(gradient + 0.5 * kPi);
    }
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  const auto k = static_cast<std::size_t>(
      std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

double consensus_score(const std::vector<DetectedSegment>& segs,
                       const std::vector<std::size_t>& pool, const HomogeneousPoint& vp,
                       double angle, std::vector<std::size_t>* inliers) {
  double score = 0.0;
  if (inliers) inliers->clear();
  for (std::size_t idx : pool) {
    if (is_consensus_inlier(segs[idx].seg, vp, angle)) {
      score += segs[idx].seg.length();
      if (inliers) inliers->push_back(idx);
    }
  }
  return score;
}

// Length-weighted least squares on line coefficients in normalized coordinates.
// The algebraic residual l . X (unit X) approximates the angular deviation for VPs
// far from the segments and handles points at infinity uniformly.
// Length-weighted algebraic fit. With `current`, weights are additionally Cauchy-damped by
// each segment's deviation from it.
std::optional<HomogeneousPoint> refine(const std::vector<DetectedSegment>& segs,
                                       const std::vector<std::size_t>& inliers,
                                       const HomogeneousPoint* current = nullptr) {
  if (inliers.size() < 2) return std::nullopt;
  Point2 c{0.0, 0.0};
  for (std::size_t i : inliers) c = c + segs[i].seg.midpoint();
  c = (1.0 / static_cast<double>(inliers.size())) * c;
  double spread = 0.0;
  for (std::size_t i : inliers) {
    spread += norm(segs[i].seg.p0() - c) + norm(segs[i].seg.p1() - c);
  }
  spread /= 2.0 * static_cast<double>(inliers.size());
  const double s = spread > 0.0 ? 1.0 / spread : 1.0;

  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  for (std::size_t i : inliers) {
    const auto& seg = segs[i].seg;
    const LineSegment local(s * (seg.p0() - c), s * (seg.p1() - c));
    const auto l = line_coefficients(local);
    const Eigen::Vector3d v(l[0], l[1], l[2]);
    double weight = seg.length();
    if (current) {
      const double r = segment_vp_deviation(seg, *current) / kRobustScale;
      weight /= 1.0 + r * r;
    }
    a += weight * v * v.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(a);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const Eigen::Vector3d x = eig.eigenvectors().col(0);
  const double w = x[2];
  const double px = x[0] / s + c.x * w;
  const double py = x[1] / s + c.y * w;
  if (!std::isfinite(px) || !std::isfinite(py) || (px == 0.0 && py == 0.0 && w == 0.0)) {
    return std::nullopt;
  }
  return HomogeneousPoint(px, py, w).normalized();
}

}  // namespace

void RansacConfig::validate() const {
  if (iterations < 1) throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 1");
  if (!(consensus_angle > 0.0 && consensus_angle < kPi / 4.0)) {
    throw Error(ErrorCode::kInvalidArgument, "consensus_angle must lie in (0, pi/4)");
  }
  if (max_vps < 1) throw Error(ErrorCode::kInvalidArgument, "max_vps must be >= 1");
  if (min_inliers < 2) throw Error(ErrorCode::kInvalidArgument, "min_inliers must be >= 2");
  if (!(min_segment_length > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_segment_length must be positive");
  }
  if (!(magnitude_quantile >= 0.0 && magnitude_quantile < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "magnitude_quantile must lie in [0, 1)");
  }
}

std::string RansacConfig::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << iterations << '|' << consensus_angle << '|' << max_vps << '|' << min_inliers << '|'
     << min_segment_length << '|' << magnitude_quantile << '|' << rng_seed;
  return os.str();
}

bool is_consensus_inlier(const LineSegment& seg, const HomogeneousPoint& vp,
                         double consensus_angle) {
  try {
    return segment_vp_deviation(seg, vp) <= consensus_angle;
  } catch (const Error&) {
    // VP at the segment midpoint: deviation undefined.
    return false;
  }
}

std::vector<DetectedSegment> extract_segments(const EdgeField& ef, const RansacConfig& cfg) {
  cfg.validate();
  const int w = ef.width();
  const int h = ef.height();
  const auto mags = ef.magnitude.data();
  const double max_mag = mags.empty() ? 0.0 : *std::max_element(mags.begin(), mags.end());
  if (!(max_mag > 0.0)) return {};
  const double threshold =
      std::max({quantile({mags.begin(), mags.end()}, cfg.magnitude_quantile),
                kRelativeMagnitudeFloor * max_mag, 1e-9});

  std::vector<std::size_t> order;
  const std::vector<double> angle = tensor_orientation(ef);
  std::vector<char> candidate(mags.size(), 0);
  for (std::size_t i = 0; i < mags.size(); ++i) {
    if (mags[i] >= threshold) {
      order.push_back(i);
      candidate[i] = 1;
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mags[a] > mags[b]; });

  std::vector<char> used(mags.size(), 0);
  auto grow = [&](std::size_t seed, double tolerance) {
    used[seed] = 1;
    Region region;
    double sum_c = std::cos(2.0 * angle[seed]);
    double sum_s = std::sin(2.0 * angle[seed]);
    double region_angle = angle[seed];
    std::vector<std::size_t> frontier{seed};
    for (std::size_t head = 0; head < frontier.size(); ++head) {
      const std::size_t cur = frontier[head];
      const int cx = static_cast<int>(cur % w);
      const int cy = static_cast<int>(cur / w);
      region.pixels.push_back({cx, cy, mags[cur]});
      for (int dy = -kRegionNeighborhood; dy <= kRegionNeighborhood; ++dy) {
        for (int dx = -kRegionNeighborhood; dx <= kRegionNeighborhood; ++dx) {
          const int nx = cx + dx;
          const int ny = cy + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
          if (!candidate[ni] || used[ni]) continue;
          if (orientation_gap(angle[ni], region_angle) > tolerance) continue;
          used[ni] = 1;
          frontier.push_back(ni);
          sum_c += std::cos(2.0 * angle[ni]);
          sum_s += std::sin(2.0 * angle[ni]);
          region_angle = orientation(0.5 * std::atan2(sum_s, sum_c));
        }
      }
    }
    return region;
  };
  auto release = [&](const Region& region) {
    for (const auto& p : region.pixels) used[static_cast<std::size_t>(p.y) * w + p.x] = 0;
  };

  std::vector<Region> regions;
  for (std::size_t seed : order) {
    if (used[seed]) continue;
    // Two edges meeting at a shallow corner grow into one wide, uneven region; retry tighter.
    // Thick lines are wide too, but evenly so along their length.
    Region region;
    bool accepted = false;
    for (double tolerance = kRegionAngleTolerance;; tolerance /= 2.0) {
      region = grow(seed, tolerance);
      if (static_cast<int>(region.pixels.size()) < kMinRegionPixels) break;
      fit(region);
      if (region.spread <= kMaxRegionSpread || region.spread_range <= kMaxSpreadRange) {
        accepted = true;
        break;
      }
      if (tolerance / 2.0 < kMinRegionAngleTolerance) break;
      release(region);
    }
    if (!accepted || region.length() < 1.0) continue;
    regions.push_back(std::move(region));
  }

  // Rejoin collinear pieces split by crossings or end effects.
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < regions.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < regions.size() && !merged; ++j) {
        if (!mergeable(regions[i], regions[j])) continue;
        regions[i].pixels.insert(regions[i].pixels.end(), regions[j].pixels.begin(),
                                 regions[j].pixels.end());
        fit(regions[i]);
        regions.erase(regions.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
    }
  }

  std::vector<DetectedSegment> out;
  for (const auto& r : regions) {
    const int support = static_cast<int>(r.pixels.size());
    if (r.length() < cfg.min_segment_length || support < cfg.min_segment_length) continue;
    double sum = 0.0;
    for (const auto& p : r.pixels) sum += p.weight;
    out.push_back({LineSegment(r.p0(), r.p1()), support, sum / support});
  }
  return out;
}

std::vector<VpCandidate> detect_vps(const std::vector<DetectedSegment>& segments,
                                    const RansacConfig& cfg) {
  cfg.validate();
  std::vector<VpCandidate> out;
  std::vector<std::size_t> remaining(segments.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});

  for (int model = 0; model < cfg.max_vps && remaining.size() >= 2; ++model) {
    std::optional<HomogeneousPoint> best_vp;
    double best_score = 0.0;
    for (int round = 0; round < cfg.iterations; ++round) {
      detail::SplitMix64 rng(detail::derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(model),
                                                 static_cast<std::uint64_t>(round)));
      const std::size_t n = remaining.size();
      const std::size_t i = rng.below(n);
      std::size_t j = rng.below(n - 1);
      if (j >= i) ++j;
      HomogeneousPoint hyp(0.0, 0.0, 1.0);
      try {
        hyp = intersect_lines(segments[remaining[i]].seg, segments[remaining[j]].seg);
      } catch (const Error&) {
        continue;
      }
      const double score = consensus_score(segments, remaining, hyp, cfg.consensus_angle, nullptr);
      if (score > best_score) {
        best_score = score;
        best_vp = hyp;
      }
    }
    if (!best_vp) break;

    std::vector<std::size_t> inliers;
    best_score = consensus_score(segments, remaining, *best_vp, cfg.consensus_angle, &inliers);
    for (int r = 0; r < kRefineRounds; ++r) {
      const auto refined = refine(segments, inliers);
      if (!refined) break;
      std::vector<std::size_t> refined_inliers;
      const double score =
          consensus_score(segments, remaining, *refined, cfg.consensus_angle, &refined_inliers);
      if (score < best_score || refined_inliers.empty()) break;
      best_vp = refined;
      best_score = score;
      inliers = std::move(refined_inliers);
    }
    for (int r = 0; r < kRobustRounds; ++r) {
      const auto refined = refine(segments, inliers, &*best_vp);
      if (!refined) break;
      best_vp = refined;
    }
    best_score = consensus_score(segments, remaining, *best_vp, cfg.consensus_angle, &inliers);
    if (static_cast<int>(inliers.size()) < cfg.min_inliers) break;

    std::sort(inliers.begin(), inliers.end());
    out.push_back({*best_vp, inliers, best_score});
    std::vector<std::size_t> rest;
    std::set_difference(remaining.begin(), remaining.end(), inliers.begin(), inliers.end(),
                        std::back_inserter(rest));
    remaining = std::move(rest);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const VpCandidate& a, const VpCandidate& b) { return a.score > b.score; });
  return out;
}

std::vector<VpCandidate> detect_vps_in_image(const ScalarField& gray, const RansacConfig& cfg) {
  return detect_vps(extract_segments(sobel(gray), cfg), cfg);
}

}  // namespace vpfix
