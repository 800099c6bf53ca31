#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "vpfix/vp_detection.hpp"
#include "vpfix_test/expect.hpp"
#include "vpfix_test/fixtures.hpp"

using namespace vpfix;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<DetectedSegment> as_detected(const std::vector<LineSegment>& segs) {
  std::vector<DetectedSegment> out;
  for (const auto& s : segs) out.push_back({s, static_cast<int>(s.length()), 1.0});
  return out;
}

double direction_gap(const LineSegment& a, Point2 dir) {
  const auto u = UnitVector2::from(a.p1().x - a.p0().x, a.p1().y - a.p0().y);
  return undirected_angle(u, UnitVector2::from(dir.x, dir.y));
}

}  // namespace

TEST(ExtractSegments, BlankImageGivesNothing) {
  EXPECT_TRUE(extract_segments(sobel(ScalarField(64, 64)), RansacConfig{}).empty());
}

TEST(ExtractSegments, SingleAntiAliasedLine) {
  const Point2 a{10, 10};
  const Point2 b{100, 50};
  const auto img = test::line_image(128, 64, a, b);
  const auto segs = extract_segments(sobel(img), RansacConfig{});
  ASSERT_EQ(segs.size(), 1u);
  const auto& s = segs[0].seg;
  const bool forward = norm(s.p0() - a) < norm(s.p1() - a);
  const Point2 p0 = forward ? s.p0() : s.p1();
  const Point2 p1 = forward ? s.p1() : s.p0();
  EXPECT_LT(norm(p0 - a), 2.0);
  EXPECT_LT(norm(p1 - b), 2.0);
  EXPECT_LT(direction_gap(s, b - a), 1.0 * kDeg);
  EXPECT_GE(segs[0].support, 20);
  EXPECT_GT(segs[0].mean_magnitude, 0.0);
}

TEST(ExtractSegments, PlusGivesTwoPerpendicularSegments) {
  const auto segs = extract_segments(sobel(test::plus_image(96)), RansacConfig{});
  ASSERT_EQ(segs.size(), 2u);
  const auto d0 = UnitVector2::from(segs[0].seg.p1().x - segs[0].seg.p0().x,
                                    segs[0].seg.p1().y - segs[0].seg.p0().y);
  const auto d1 = UnitVector2::from(segs[1].seg.p1().x - segs[1].seg.p0().x,
                                    segs[1].seg.p1().y - segs[1].seg.p0().y);
  const double angle = undirected_angle(d0, d1);
  EXPECT_GE(angle, 89.0 * kDeg);
  EXPECT_LE(angle, 91.0 * kDeg);
}

TEST(ExtractSegments, Deterministic) {
  const auto ef = sobel(test::box_scene(3).image);
  const auto a = extract_segments(ef, RansacConfig{});
  const auto b = extract_segments(ef, RansacConfig{});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].seg, b[i].seg);
}

TEST(DetectVps, NoiselessBundleThroughOnePoint) {
  const auto segs = as_detected(test::bundle_through({200, 150}, 10, 0.0, 1));
  const auto c = detect_vps(segs, RansacConfig{});
  ASSERT_EQ(c.size(), 1u);
  const auto p = c[0].vp.euclidean();
  ASSERT_TRUE(p.has_value());
  EXPECT_LT(norm(*p - Point2{200, 150}), 0.5);
  EXPECT_EQ(c[0].inliers.size(), 10u);
}

TEST(DetectVps, FiniteBundleAndBundleAtInfinity) {
  auto segs = test::bundle_through({50, 50}, 8, 0.0, 2);
  for (int i = 0; i < 8; ++i) {
    const double y = 300 + 20 * i;
    const double x = 100 + 13 * i;
    segs.emplace_back(Point2{x, y}, Point2{x + 80 + 5 * i, y});
  }
  const auto c = detect_vps(as_detected(segs), RansacConfig{});
  ASSERT_EQ(c.size(), 2u);
  bool finite_found = false;
  bool infinite_found = false;
  for (const auto& cand : c) {
    const auto n = cand.vp.normalized();
    const auto e = cand.vp.euclidean();
    if (e && norm(*e - Point2{50, 50}) < 1.0) finite_found = true;
    const bool at_inf = std::abs(n.w()) < 1e-3;
    const bool aligned = camera_angle_error(CameraIntrinsics::default_for(512, 512), cand.vp,
                                            HomogeneousPoint(1, 0, 0)) < RansacConfig{}.consensus_angle;
    if (at_inf || aligned) infinite_found = true;
  }
  EXPECT_TRUE(finite_found);
  EXPECT_TRUE(infinite_found);
}

TEST(DetectVps, SingleSegmentGivesNothing) {
  EXPECT_TRUE(detect_vps(as_detected({LineSegment({0, 0}, {50, 0})}), RansacConfig{}).empty());
  EXPECT_TRUE(detect_vps({}, RansacConfig{}).empty());
}

TEST(DetectVps, DeterministicSoundAndDisjoint) {
  auto segs = test::bundle_through({260, -80}, 12, 1.0, 5);
  const auto more = test::bundle_through({-300, 240}, 10, 1.0, 6);
  segs.insert(segs.end(), more.begin(), more.end());
  const auto det = as_detected(segs);
  RansacConfig cfg;
  cfg.rng_seed = 1234;
  const auto a = detect_vps(det, cfg);
  const auto b = detect_vps(det, cfg);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_GE(a.size(), 2u);
  std::set<std::size_t> seen;
  double last_score = INFINITY;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].vp.components(), b[i].vp.components());
    EXPECT_EQ(a[i].inliers, b[i].inliers);
    EXPECT_LE(a[i].score, last_score);
    last_score = a[i].score;
    EXPECT_FALSE(a[i].inliers.empty());
    double length = 0.0;
    for (std::size_t idx : a[i].inliers) {
      EXPECT_LE(segment_vp_deviation(det[idx].seg, a[i].vp), cfg.consensus_angle);
      EXPECT_TRUE(seen.insert(idx).second) << "segment " << idx << " in two candidates";
      length += det[idx].seg.length();
    }
    EXPECT_NEAR(a[i].score, length, 1e-9 * length);
  }
}

TEST(DetectVps, RecoversJitteredVpIn95Of100Trials) {
  const auto k = CameraIntrinsics::default_for(512, 512);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coord(-300.0, 800.0);
  int good = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Point2 vp{coord(rng), coord(rng)};
    RansacConfig cfg;
    cfg.rng_seed = static_cast<std::uint64_t>(trial);
    const auto c = detect_vps(as_detected(test::bundle_through(vp, 12, 1.0, 100 + trial)), cfg);
    if (!c.empty() && camera_angle_error(k, c[0].vp, HomogeneousPoint::finite(vp)) < kDeg) ++good;
  }
  EXPECT_GE(good, 95);
}

TEST(DetectVpsInImage, CorridorFixtureWithinThreeDegrees) {
  const auto scene = test::corridor_scene();
  const auto c = detect_vps_in_image(scene.image, RansacConfig{});
  ASSERT_FALSE(c.empty());
  const auto k = CameraIntrinsics::default_for(scene.image.width(), scene.image.height());
  double best = INFINITY;
  for (const auto& cand : c) best = std::min(best, camera_angle_error(k, cand.vp, scene.vp));
  EXPECT_LT(best, 3.0 * kDeg);
}

TEST(RansacConfig, ValidationAndFingerprint) {
  RansacConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  RansacConfig other = cfg;
  other.rng_seed = 43;
  EXPECT_NE(cfg.fingerprint(), other.fingerprint());
  EXPECT_EQ(cfg.fingerprint(), RansacConfig{}.fingerprint());
  cfg.iterations = 0;
  EXPECT_VPFIX_ERROR(cfg.validate(), ErrorCode::kInvalidArgument);
  cfg = {};
  cfg.consensus_angle = 50.0 * kDeg;
  EXPECT_VPFIX_ERROR(cfg.validate(), ErrorCode::kInvalidArgument);
}

TEST(IsConsensusInlier, FalseWhenVpAtMidpoint) {
  EXPECT_FALSE(is_consensus_inlier(LineSegment({0, 0}, {10, 0}), HomogeneousPoint(5, 0, 1), 0.1));
  EXPECT_TRUE(is_consensus_inlier(LineSegment({0, 0}, {10, 0}), HomogeneousPoint(50, 0, 1), 0.1));
}
