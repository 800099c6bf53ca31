#pragma once

#include <cstdint>
#include <vector>

#include "vpfix/edge_analysis.hpp"

namespace vpfix::tools {

struct GradCheckOptions {
  int size = 16;
  int trials = 5;
  int vps_per_trial = 2;
  /// Central-difference step.
  double step = 1e-4;
  /// Pixels with the largest analytic gradient that are probed per trial.
  int probes = 50;
  double tolerance = 1e-3;
  std::uint64_t seed = 42;
  VpLossConfig loss;
};

struct GradTrial {
  std::uint64_t seed = 0;
  std::vector<HomogeneousPoint> vps;
  double loss = 0.0;
  double max_rel_err = 0.0;
  /// Flat index (y * size + x) of the worst probe.
  int worst_pixel = -1;
};

struct GradCheckReport {
  GradCheckOptions options;
  std::vector<GradTrial> trials;
  double max_rel_err = 0.0;
  bool passed = false;
};

/// Compares the analytic VP-loss gradient against central finite differences on random
/// images (uniform in [0, 1]) with random finite VPs. Throws ImageTooSmall when the image
/// has fewer pixels than probes, or below 3x3.
GradCheckReport run_grad_check(const GradCheckOptions& options);

}  // namespace vpfix::tools
