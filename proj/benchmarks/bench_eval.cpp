#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "stereo3d/eval.hpp"

namespace {

using namespace stereo3d;

void BM_BevIou(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ext(1.0, 5.0), yaw(-kPi, kPi), off(-2.0, 2.0);
  std::vector<std::pair<BevBox, BevBox>> pairs;
  for (int i = 0; i < 512; ++i) {
    const BevBox a{0.0, 0.0, ext(rng), ext(rng), yaw(rng)};
    pairs.push_back({a, {off(rng), off(rng), ext(rng), ext(rng), yaw(rng)}});
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& p = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(bev_iou(p.first, p.second));
  }
}
BENCHMARK(BM_BevIou);

}  // namespace
