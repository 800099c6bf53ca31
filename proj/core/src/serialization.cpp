#include "vpfix/serialization.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vpfix/atomic_file.hpp"
#include "vpfix/error.hpp"
#include "vpfix/image_io.hpp"

namespace vpfix {
namespace {

constexpr char kLatentMagic[8] = {'V', 'P', 'L', 'T', '0', '0', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "latent I/O assumes a little-endian host");

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorCode::kFormat, std::string(what) + " must be a number");
  return j.get<double>();
}

std::string threshold_key(double t) {
  if (t == std::floor(t) && std::abs(t) < 1e15) return std::to_string(static_cast<long long>(t));
  return Json(t).dump();
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[off + i]) << (8 * i);
  return v;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kFormat, "invalid JSON in " + path.string() + ": " + e.what());
  }
}

Json to_json(const HomogeneousPoint& vp) { return Json::array({vp.x(), vp.y(), vp.w()}); }

HomogeneousPoint vp_from_json(const Json& j) {
  if (!j.is_array() || (j.size() != 3 && j.size() != 2)) {
    throw Error(ErrorCode::kFormat, "a VP must be [x, y, w] (or [x, y] for a finite point)");
  }
  const double w = j.size() == 3 ? number(j[2], "vp.w") : 1.0;
  return {number(j[0], "vp.x"), number(j[1], "vp.y"), w};
}

Json to_json(Point2 p) { return Json::array({p.x, p.y}); }

Point2 point_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::kFormat, "a point must be [x, y]");
  return {number(j[0], "point.x"), number(j[1], "point.y")};
}

std::vector<HomogeneousPoint> read_vp_sidecar(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  if (!j.is_object() || !j.contains("vps") || !j["vps"].is_array()) {
    throw Error(ErrorCode::kFormat, "VP sidecar must be {\"vps\": [[x, y, w], ...]}");
  }
  std::vector<HomogeneousPoint> vps;
  for (const auto& v : j["vps"]) vps.push_back(vp_from_json(v));
  return vps;
}

Json to_json(const VpLossConfig& cfg) {
  return {{"theta_thresh_deg", rad_to_deg(cfg.theta_thresh)},
          {"sigmoid_steepness", cfg.sigmoid_steepness},
          {"magnitude_epsilon", cfg.magnitude_epsilon},
          {"weighting_mode", std::string(to_string(cfg.weighting_mode))},
          {"border_policy", "replicate"},
          {"normalize_by_pixel_count", cfg.normalize_by_pixel_count}};
}

Json to_json(const VpScoreReport& report) {
  Json vps = Json::array();
  for (const auto& vp : report.vps) vps.push_back(to_json(vp));
  return {{"vps", vps},
          {"scores_pred", report.scores_pred},
          {"scores_gt", report.scores_gt},
          {"loss", report.loss},
          {"config", to_json(report.config)}};
}

Json to_json(const RansacConfig& cfg) {
  return {{"iterations", cfg.iterations},
          {"consensus_angle_deg", rad_to_deg(cfg.consensus_angle)},
          {"max_vps", cfg.max_vps},
          {"min_inliers", cfg.min_inliers},
          {"min_segment_length", cfg.min_segment_length},
          {"magnitude_quantile", cfg.magnitude_quantile},
          {"rng_seed", cfg.rng_seed}};
}

RansacConfig ransac_config_from_json(const Json& j, RansacConfig base) {
  if (!j.is_object()) throw Error(ErrorCode::kFormat, "RANSAC config must be a JSON object");
  try {
    if (j.contains("iterations")) base.iterations = j.at("iterations").get<int>();
    if (j.contains("consensus_angle_deg")) {
      base.consensus_angle = deg_to_rad(j.at("consensus_angle_deg").get<double>());
    }
    if (j.contains("max_vps")) base.max_vps = j.at("max_vps").get<int>();
    if (j.contains("min_inliers")) base.min_inliers = j.at("min_inliers").get<int>();
    if (j.contains("min_segment_length")) {
      base.min_segment_length = j.at("min_segment_length").get<double>();
    }
    if (j.contains("magnitude_quantile")) {
      base.magnitude_quantile = j.at("magnitude_quantile").get<double>();
    }
    if (j.contains("rng_seed")) base.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad RANSAC config: ") + e.what());
  }
  base.validate();
  return base;
}

Json candidates_to_json(const std::vector<VpCandidate>& candidates, const RansacConfig& cfg) {
  Json list = Json::array();
  for (const auto& c : candidates) {
    list.push_back({{"vp", to_json(c.vp)}, {"score", c.score}, {"inliers", c.inliers}});
  }
  return {{"candidates", list}, {"detector", "ransac"}, {"config", to_json(cfg)}};
}

Json outlines_to_json(const std::vector<OutlineEdge>& edges) {
  Json list = Json::array();
  for (const auto& e : edges) {
    list.push_back({{"p0", to_json(e.seg.p0())},
                    {"p1", to_json(e.seg.p1())},
                    {"vp_index", e.vp_index},
                    {"deviation_deg", rad_to_deg(e.deviation)}});
  }
  return list;
}

Json to_json(const DiffusionSchedule& sched) {
  return {{"T", sched.timesteps()},
          {"alpha_bar", std::vector<double>(sched.values().begin(), sched.values().end())}};
}

DiffusionSchedule schedule_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("alpha_bar") || !j["alpha_bar"].is_array()) {
    throw Error(ErrorCode::kFormat, "schedule must be {\"T\": n, \"alpha_bar\": [...]}");
  }
  std::vector<double> ab;
  for (const auto& v : j["alpha_bar"]) ab.push_back(number(v, "alpha_bar entry"));
  if (j.contains("T") && (!j["T"].is_number_integer() || j["T"].get<std::size_t>() != ab.size())) {
    throw Error(ErrorCode::kInvalidSchedule, "schedule T does not match alpha_bar length");
  }
  return DiffusionSchedule(std::move(ab));
}

Json to_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
}

Json to_json(const AAReport& report) {
  Json per_image = Json::array();
  for (const auto& r : report.per_image) {
    per_image.push_back({{"image_id", r.image_id},
                         {"min_error_deg", r.min_error_deg},
                         {"detector", r.detector},
                         {"no_detections", r.no_detections},
                         {"intrinsics", to_json(r.intrinsics)}});
  }
  Json aa = Json::object();
  for (const auto& [t, v] : report.aa_at) aa[threshold_key(t)] = v;
  return {{"thresholds_deg", report.thresholds_deg},
          {"aa_at", aa},
          {"mean_error_deg", report.mean_error_deg},
          {"per_image", per_image},
          {"detector", report.detector},
          {"intrinsics", report.intrinsics ? to_json(*report.intrinsics) : Json(nullptr)},
          {"no_detection_policy", "scored_as_90_deg"},
          {"psd", nullptr},
          {"psnr", nullptr},
          {"mse", nullptr}};
}

std::vector<std::uint8_t> encode_latent(const LatentTensor& t) {
  std::vector<std::uint8_t> out(kLatentMagic, kLatentMagic + 8);
  put_u32(out, static_cast<std::uint32_t>(t.shape().size()));
  for (std::size_t d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
  for (double v : t.data()) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    put_u32(out, bits);
  }
  return out;
}

LatentTensor decode_latent(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kLatentMagic, 8) != 0) {
    throw Error(ErrorCode::kFormat, "not a latent file (bad magic)");
  }
  const std::uint32_t rank = get_u32(bytes, 8);
  if (bytes.size() < 12 + 4ull * rank) throw Error(ErrorCode::kFormat, "truncated latent header");
  std::vector<std::size_t> shape;
  std::size_t count = 1;
  const std::size_t payload = 12 + 4ull * rank;
  const std::size_t max_count = (bytes.size() - payload) / 4;
  for (std::uint32_t i = 0; i < rank; ++i) {
    shape.push_back(get_u32(bytes, 12 + 4 * i));
    // Bounded by the bytes present, so the product cannot overflow.
    if (shape.back() != 0 && count > max_count / shape.back()) {
      throw Error(ErrorCode::kFormat, "latent payload size does not match its shape");
    }
    count *= shape.back();
  }
  if (bytes.size() != payload + 4 * count) {
    throw Error(ErrorCode::kFormat, "latent payload size does not match its shape");
  }
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, payload + 4 * i)));
  }
  return {std::move(shape), std::move(data)};
}

void write_latent(const std::filesystem::path& path, const LatentTensor& t) {
  io::write_file_atomic(path, encode_latent(t));
}

LatentTensor read_latent(const std::filesystem::path& path) {
  return decode_latent(io::read_file(path));
}

}  // namespace vpfix
