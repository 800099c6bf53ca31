#include "vpfix/tools/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vpfix/error.hpp"

namespace vpfix::tools {
namespace {

// Portable uniform [0, 1): mt19937_64 output is fully specified, the std distributions are not.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

ScalarField random_image(int size, std::mt19937_64& rng) {
  ScalarField img(size, size);
  for (double& v : img.data()) v = unit(rng);
  return img;
}

}  // namespace

GradCheckReport run_grad_check(const GradCheckOptions& o) {
  if (o.size < 3 || o.size * o.size < o.probes) {
    throw Error(ErrorCode::kImageTooSmall,
                "grad-check needs at least " + std::to_string(o.probes) + " pixels and 3x3");
  }
  if (o.trials < 1 || o.vps_per_trial < 1 || o.probes < 1 || !(o.step > 0.0) ||
      !(o.tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "grad-check options must be positive");
  }
  o.loss.validate();

  GradCheckReport report;
  report.options = o;
  const double n = o.size;
  for (int trial = 0; trial < o.trials; ++trial) {
    GradTrial tr;
    tr.seed = o.seed + static_cast<std::uint64_t>(trial);
    std::mt19937_64 rng(tr.seed);
    ScalarField pred = random_image(o.size, rng);
    const ScalarField gt = random_image(o.size, rng);
    for (int k = 0; k < o.vps_per_trial; ++k) {
      const double x = -n + 3.0 * n * unit(rng);
      const double y = -n + 3.0 * n * unit(rng);
      tr.vps.push_back(HomogeneousPoint::finite({x, y}));
    }

    const ScalarField grad = vp_loss_gradient(pred, gt, tr.vps, o.loss);
    tr.loss = vp_loss(pred, gt, tr.vps, o.loss).loss;

    std::vector<int> order(grad.size());
    std::iota(order.begin(), order.end(), 0);
    const int probes = std::min<int>(o.probes, static_cast<int>(order.size()));
    std::partial_sort(order.begin(), order.begin() + probes, order.end(), [&](int a, int b) {
      const double ga = std::abs(grad.data()[a]);
      const double gb = std::abs(grad.data()[b]);
      return ga != gb ? ga > gb : a < b;
    });

    for (int i = 0; i < probes; ++i) {
      const int p = order[i];
      const double orig = pred.data()[p];
      pred.data()[p] = orig + o.step;
      const double up = vp_loss(pred, gt, tr.vps, o.loss).loss;
      pred.data()[p] = orig - o.step;
      const double down = vp_loss(pred, gt, tr.vps, o.loss).loss;
      pred.data()[p] = orig;
      const double numeric = (up - down) / (2.0 * o.step);
      const double analytic = grad.data()[p];
      const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
      const double rel = std::abs(analytic - numeric) / scale;
      if (tr.worst_pixel < 0 || rel > tr.max_rel_err) {
        tr.max_rel_err = rel;
        tr.worst_pixel = p;
      }
    }
    report.max_rel_err = std::max(report.max_rel_err, tr.max_rel_err);
    report.trials.push_back(std::move(tr));
  }
  report.passed = report.max_rel_err < o.tolerance;
  return report;
}

}  // namespace vpfix::tools
