#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "vpfix/serialization.hpp"
#include "vpfix_test/expect.hpp"
#include "vpfix_test/temp_dir.hpp"

using namespace vpfix;

namespace {

std::vector<std::uint8_t> le32(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
}

}  // namespace

TEST(Latent, ByteLayout) {
  const LatentTensor t({2, 1}, {1.0, -2.5});
  const auto bytes = encode_latent(t);
  ASSERT_EQ(bytes.size(), 8u + 4u + 8u + 8u);
  EXPECT_EQ(std::memcmp(bytes.data(), "VPLT0001", 8), 0);
  std::vector<std::uint8_t> expected{'V', 'P', 'L', 'T', '0', '0', '0', '1'};
  for (std::uint32_t v : {2u, 2u, 1u, 0x3F800000u, 0xC0200000u}) {
    const auto b = le32(v);
    expected.insert(expected.end(), b.begin(), b.end());
  }
  EXPECT_EQ(bytes, expected);
}

TEST(Latent, RoundTripIsExactForFloatValues) {
  std::mt19937_64 rng(9);
  std::normal_distribution<float> n;
  for (const auto& shape : std::vector<std::vector<std::size_t>>{{4, 8, 8}, {1, 4, 3, 5}, {7}}) {
    std::size_t count = 1;
    for (auto d : shape) count *= d;
    std::vector<double> data(count);
    for (double& v : data) v = n(rng);
    const LatentTensor t(shape, data);
    EXPECT_EQ(decode_latent(encode_latent(t)), t);
  }
  test::TempDir dir;
  const LatentTensor t({4, 2, 2}, 0.25);
  write_latent(dir / "z.bin", t);
  EXPECT_EQ(read_latent(dir / "z.bin"), t);
}

TEST(Latent, RejectsMalformedBytes) {
  auto good = encode_latent(LatentTensor({2, 2}, 1.0));
  auto bad_magic = good;
  bad_magic[7] = '2';
  EXPECT_VPFIX_ERROR(decode_latent(bad_magic), ErrorCode::kFormat);
  auto truncated = good;
  truncated.pop_back();
  EXPECT_VPFIX_ERROR(decode_latent(truncated), ErrorCode::kFormat);
  auto extra = good;
  extra.push_back(0);
  EXPECT_VPFIX_ERROR(decode_latent(extra), ErrorCode::kFormat);
  EXPECT_VPFIX_ERROR(decode_latent(std::vector<std::uint8_t>{'V', 'P'}), ErrorCode::kFormat);
  // 2^31 x 2^31 x 4 bytes wraps to zero in 64 bits.
  std::vector<std::uint8_t> huge{'V', 'P', 'L', 'T', '0', '0', '0', '1'};
  for (std::uint32_t v : {2u, 0x80000000u, 0x80000000u}) {
    const auto b = le32(v);
    huge.insert(huge.end(), b.begin(), b.end());
  }
  EXPECT_VPFIX_ERROR(decode_latent(huge), ErrorCode::kFormat);
  test::TempDir dir;
  EXPECT_VPFIX_ERROR(read_latent(dir / "missing.bin"), ErrorCode::kIo);
}

TEST(Json, VpAndPointForms) {
  EXPECT_EQ(to_json(HomogeneousPoint(1, 2, 0)), Json::parse("[1.0, 2.0, 0.0]"));
  const auto vp = vp_from_json(Json::parse("[3, 4, 0.5]"));
  EXPECT_EQ(vp.components(), HomogeneousPoint(3, 4, 0.5).components());
  EXPECT_EQ(vp_from_json(Json::parse("[3, 4]")).w(), 1.0);
  EXPECT_VPFIX_ERROR(vp_from_json(Json::parse("[1]")), ErrorCode::kFormat);
  EXPECT_VPFIX_ERROR(vp_from_json(Json::parse("[1, \"a\", 1]")), ErrorCode::kFormat);
  EXPECT_EQ(point_from_json(to_json(Point2{1.5, -2})), (Point2{1.5, -2}));
  EXPECT_VPFIX_ERROR(point_from_json(Json::parse("{\"x\": 1}")), ErrorCode::kFormat);
}

TEST(Json, VpSidecar) {
  test::TempDir dir;
  test::write_text(dir / "a.vps.json", R"({"vps": [[1, 2, 1], [0, 1, 0]]})");
  const auto vps = read_vp_sidecar(dir / "a.vps.json");
  ASSERT_EQ(vps.size(), 2u);
  EXPECT_EQ(vps[1].w(), 0.0);
  test::write_text(dir / "b.vps.json", R"([[1, 2, 1]])");
  EXPECT_VPFIX_ERROR(read_vp_sidecar(dir / "b.vps.json"), ErrorCode::kFormat);
  test::write_text(dir / "c.vps.json", "{not json");
  EXPECT_VPFIX_ERROR(read_vp_sidecar(dir / "c.vps.json"), ErrorCode::kFormat);
  EXPECT_VPFIX_ERROR(read_vp_sidecar(dir / "none.json"), ErrorCode::kIo);
}

TEST(Json, RansacConfigOverlayAndRoundTrip) {
  RansacConfig cfg;
  cfg.iterations = 123;
  cfg.rng_seed = 77;
  const auto back = ransac_config_from_json(to_json(cfg));
  EXPECT_EQ(back.fingerprint(), cfg.fingerprint());
  const auto partial = ransac_config_from_json(Json::parse(R"({"consensus_angle_deg": 4})"));
  EXPECT_NEAR(partial.consensus_angle, deg_to_rad(4.0), 1e-15);
  EXPECT_EQ(partial.iterations, RansacConfig{}.iterations);
  EXPECT_VPFIX_ERROR(ransac_config_from_json(Json::parse(R"({"iterations": "many"})")),
                     ErrorCode::kFormat);
  EXPECT_VPFIX_ERROR(ransac_config_from_json(Json::parse(R"({"iterations": 0})")),
                     ErrorCode::kInvalidArgument);
  EXPECT_VPFIX_ERROR(ransac_config_from_json(Json::array()), ErrorCode::kFormat);
}

TEST(Json, ScheduleRoundTripAndChecks) {
  const DiffusionSchedule s({0.9, 0.5, 0.1});
  const auto j = to_json(s);
  EXPECT_EQ(j["T"], 3);
  EXPECT_EQ(schedule_from_json(j).values().size(), 3u);
  EXPECT_VPFIX_ERROR(schedule_from_json(Json::parse(R"({"T": 2, "alpha_bar": [0.9, 0.5, 0.1]})")),
                     ErrorCode::kInvalidSchedule);
  EXPECT_VPFIX_ERROR(schedule_from_json(Json::parse(R"({"alpha_bar": [0.5, 0.9]})")),
                     ErrorCode::kInvalidSchedule);
  EXPECT_VPFIX_ERROR(schedule_from_json(Json::parse(R"({"T": 2})")), ErrorCode::kFormat);
}

TEST(Json, CandidatesAndOutlines) {
  std::vector<VpCandidate> c{{HomogeneousPoint(1, 2, 1), {0, 3}, 10.5}};
  const auto j = candidates_to_json(c, RansacConfig{});
  EXPECT_EQ(j["detector"], "ransac");
  EXPECT_EQ(j["candidates"][0]["inliers"], Json::parse("[0, 3]"));
  EXPECT_EQ(j["candidates"][0]["score"], 10.5);
  EXPECT_NEAR(j["config"]["consensus_angle_deg"].get<double>(),
              rad_to_deg(RansacConfig{}.consensus_angle), 1e-12);

  const std::vector<OutlineEdge> edges{{LineSegment({0, 0}, {4, 0}), 1, deg_to_rad(2.0)}};
  const auto o = outlines_to_json(edges);
  ASSERT_EQ(o.size(), 1u);
  EXPECT_EQ(o[0]["p1"], Json::parse("[4.0, 0.0]"));
  EXPECT_EQ(o[0]["vp_index"], 1);
  EXPECT_NEAR(o[0]["deviation_deg"].get<double>(), 2.0, 1e-12);
}

TEST(Json, AAReportHasNullImageQualityFields) {
  const CameraIntrinsics k{512, 512, 256, 256};
  const auto report = make_aa_report({{"a", 2.0, "ransac", false, k}}, {0.5, 3}, "ransac");
  const auto j = to_json(report);
  EXPECT_TRUE(j["psd"].is_null());
  EXPECT_TRUE(j["psnr"].is_null());
  EXPECT_TRUE(j["mse"].is_null());
  EXPECT_EQ(j["aa_at"]["3"], 1.0);
  EXPECT_EQ(j["aa_at"]["0.5"], 0.0);
  EXPECT_EQ(j["no_detection_policy"], "scored_as_90_deg");
  EXPECT_EQ(j["intrinsics"]["fx"], 512.0);
  EXPECT_EQ(j["per_image"][0]["image_id"], "a");
}

TEST(Json, ScoreReportCarriesConfig) {
  VpScoreReport r;
  r.vps = {HomogeneousPoint(0, 1, 0)};
  r.scores_pred = {0.25};
  r.scores_gt = {0.5};
  r.loss = 0.25;
  const auto j = to_json(r);
  EXPECT_EQ(j["loss"], 0.25);
  EXPECT_NEAR(j["config"]["theta_thresh_deg"].get<double>(), 5.0, 1e-12);
  EXPECT_EQ(j["config"]["sigmoid_steepness"], 50.0);
  EXPECT_EQ(j["config"]["border_policy"], "replicate");
}
