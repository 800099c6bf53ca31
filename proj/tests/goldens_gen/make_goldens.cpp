// Regenerates tests/golden/weighting_separation.json from the naive score oracle.
// Usage: vpfix_make_goldens <golden-dir>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "vpfix_test/fixtures.hpp"
#include "vpfix_test/oracles.hpp"

using namespace vpfix;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: vpfix_make_goldens <golden-dir>\n";
    return 2;
  }
  constexpr int kSize = 64;
  constexpr double kSigma = 1.0;
  const HomogeneousPoint vp(0, 1, 0);
  nlohmann::json scores;
  for (const auto mode : {WeightingMode::kSigmoidThreshold, WeightingMode::kDotProduct}) {
    VpLossConfig cfg;
    cfg.weighting_mode = mode;
    nlohmann::json per_angle;
    for (double deg : {0.0, 1.0, 10.0}) {
      per_angle[std::to_string(static_cast<int>(deg))] =
          test::naive_alignment_score(test::smooth_edge_image(kSize, deg, kSigma), vp, cfg);
    }
    scores[std::string(to_string(mode))] = per_angle;
  }
  const nlohmann::json golden = {
      {"fixture", {{"image", "smooth_edge_image"}, {"size", kSize}, {"sigma", kSigma}, {"angles_deg", {0, 1, 10}}}},
      {"vp", {0.0, 1.0, 0.0}},
      {"theta_thresh_deg", 5.0},
      {"sigmoid_steepness", 50.0},
      {"scores", scores}};
  const auto path = std::filesystem::path(argv[1]) / "weighting_separation.json";
  std::ofstream(path) << golden.dump(2) << "\n";
  std::cout << golden.dump(2) << "\n";
  return 0;
}
