#include <random>

#include <benchmark/benchmark.h>

#include "vpfix/edge_analysis.hpp"
#include "vpfix/vp_detection.hpp"

using namespace vpfix;

namespace {

ScalarField noise_image(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScalarField img(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) img.at(x, y) = u(rng);
  }
  return img;
}

// Bright strokes converging on (size / 2, -2 * size).
ScalarField converging_lines(int size) {
  ScalarField img(size, size);
  const double vx = 0.5 * size;
  const double vy = -2.0 * size;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double t = (y - vy) / (size - 1 - vy);
      const double phase = (x - vx) / t;
      img.at(x, y) = static_cast<int>(phase + 4 * size) % 24 < 3 ? 1.0 : 0.0;
    }
  }
  return img;
}

void BM_Sobel(benchmark::State& state) {
  const auto img = noise_image(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(sobel(img));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_Sobel)->Arg(64)->Arg(256)->Arg(512);

void BM_AlignmentScore(benchmark::State& state) {
  const auto ef = sobel(noise_image(static_cast<int>(state.range(0)), 2));
  const HomogeneousPoint vp(100.0, -400.0, 1.0);
  const VpLossConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(vp_alignment_score(ef, vp, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_AlignmentScore)->Arg(64)->Arg(256)->Arg(512);

void BM_VpLossGradient(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const auto pred = noise_image(size, 3);
  const auto gt = noise_image(size, 4);
  const std::vector<HomogeneousPoint> vps{HomogeneousPoint(0, 1, 0),
                                          HomogeneousPoint(-50, 30, 1)};
  const VpLossConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(vp_loss_gradient(pred, gt, vps, cfg));
}
BENCHMARK(BM_VpLossGradient)->Arg(16)->Arg(64)->Arg(256);

void BM_DetectVpsInImage(benchmark::State& state) {
  const auto img = converging_lines(static_cast<int>(state.range(0)));
  const RansacConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(detect_vps_in_image(img, cfg));
}
BENCHMARK(BM_DetectVpsInImage)->Arg(160)->Arg(320)->Unit(benchmark::kMillisecond);

}  // namespace
