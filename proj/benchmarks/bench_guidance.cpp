#include <random>

#include <benchmark/benchmark.h>

#include "vpfix/guidance.hpp"

using namespace vpfix;

namespace {

LatentTensor random_latent(std::size_t side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  LatentTensor t({4, side, side});
  for (double& v : t.data()) v = n(rng);
  return t;
}

void BM_CfgDual(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  std::vector<LatentTensor> corners;
  for (std::uint64_t i = 0; i < 4; ++i) corners.push_back(random_latent(side, i));
  FunctionPredictor predictor(
      [&](const LatentTensor&, int, bool text, bool cond) { return corners[text * 2 + cond]; });
  const auto z = random_latent(side, 9);
  for (auto _ : state) benchmark::DoNotOptimize(cfg_dual(predictor, z, 500, {7.5, 1.5}));
}
BENCHMARK(BM_CfgDual)->Arg(8)->Arg(64);

}  // namespace
