#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "vpfix/dataset_pipeline.hpp"
#include "vpfix/edge_analysis.hpp"
#include "vpfix/eval_metrics.hpp"
#include "vpfix/guidance.hpp"
#include "vpfix/vp_detection.hpp"

namespace vpfix {

using Json = nlohmann::json;

/// Parses a file as JSON; throws Io or Format.
Json read_json_file(const std::filesystem::path& path);

/// [x, y, w]
Json to_json(const HomogeneousPoint& vp);
HomogeneousPoint vp_from_json(const Json& j);
/// [x, y]
Json to_json(Point2 p);
Point2 point_from_json(const Json& j);

/// Reads `{vps: [[x, y, w], ...]}`.
std::vector<HomogeneousPoint> read_vp_sidecar(const std::filesystem::path& path);

Json to_json(const VpLossConfig& cfg);
/// {vps, scores_pred, scores_gt, loss, config}
Json to_json(const VpScoreReport& report);

Json to_json(const RansacConfig& cfg);
/// Overlays keys present in `j` onto `base`. Angles are in degrees.
RansacConfig ransac_config_from_json(const Json& j, RansacConfig base = {});
/// {candidates: [{vp, score, inliers}], detector, config}
Json candidates_to_json(const std::vector<VpCandidate>& candidates, const RansacConfig& cfg);

/// [{p0, p1, vp_index, deviation_deg}, ...]
Json outlines_to_json(const std::vector<OutlineEdge>& edges);

/// {T, alpha_bar}
Json to_json(const DiffusionSchedule& sched);
DiffusionSchedule schedule_from_json(const Json& j);

Json to_json(const CameraIntrinsics& k);
Json to_json(const AAReport& report);

/// Latent file: magic "VPLT0001", u32 rank, rank x u32 dims, little-endian f32 payload.
std::vector<std::uint8_t> encode_latent(const LatentTensor& t);
LatentTensor decode_latent(std::span<const std::uint8_t> bytes);
void write_latent(const std::filesystem::path& path, const LatentTensor& t);
LatentTensor read_latent(const std::filesystem::path& path);

}  // namespace vpfix
