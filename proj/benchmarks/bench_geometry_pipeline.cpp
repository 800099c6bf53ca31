#include <random>

#include <benchmark/benchmark.h>

#include "vpfix/dataset_pipeline.hpp"
#include "vpfix/mask_builder.hpp"

using namespace vpfix;

namespace {

Polyline random_walk(int points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, 3.0);
  Polyline line;
  Point2 p{0, 0};
  line.points.push_back(p);
  while (static_cast<int>(line.points.size()) < points) {
    p = p + Point2{step(rng), step(rng)};
    if (p != line.points.back()) line.points.push_back(p);
  }
  return line;
}

void BM_DouglasPeucker(benchmark::State& state) {
  const auto line = random_walk(static_cast<int>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(douglas_peucker(line, 2.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DouglasPeucker)->Arg(100)->Arg(1000)->Arg(10000);

void BM_BuildMask(benchmark::State& state) {
  const std::vector<OutlinePair> pairs{
      {LineSegment({40, 400}, {200, 60}), LineSegment({60, 400}, {230, 60})},
      {LineSegment({300, 380}, {480, 100}), LineSegment({290, 380}, {460, 90})}};
  const int dilation = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_mask(pairs, 512, 512, dilation));
}
BENCHMARK(BM_BuildMask)->Arg(0)->Arg(2)->Arg(5)->Arg(15);

}  // namespace
