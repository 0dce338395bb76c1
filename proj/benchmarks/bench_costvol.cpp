#include <benchmark/benchmark.h>

#include "stereo3d/costvol.hpp"
#include "stereo3d/synth.hpp"

namespace {

using namespace stereo3d;

struct Fixture {
  SyntheticScene scene;
  OracleFeatures features;
  DepthGrid grid;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    SceneSpec spec;
    spec.seed = 11;
    spec.n_objects = 3;
    spec.allow_occlusion = false;
    SyntheticScene scene = generate_scene(spec);
    DepthGrid grid = uniform_depth_grid(5.0, 50.0, 46);
    OracleFeatures features = oracle_features(scene, grid, {});
    return Fixture{std::move(scene), std::move(features), std::move(grid)};
  }();
  return f;
}

CostVolume volume() {
  const Fixture& f = fixture();
  const OracleObject& o = f.features.objects.front();
  return build_cost_volume(f.features.left, f.features.right, o.roi, o.roi, f.grid,
                           f.scene.rig.scaled(0.25), o.out_h, o.out_w);
}

void BM_BuildCostVolume(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(volume());
}
BENCHMARK(BM_BuildCostVolume);

void BM_DepthHead(benchmark::State& state) {
  const CostVolume cv = match_reweight(volume());
  const ConvStack stack = ConvStack::random(cv.channels(), 1);
  const CostVolume attended = structure_attention(cv, stack.attention);
  for (auto _ : state) benchmark::DoNotOptimize(depth_head(attended, stack));
}
BENCHMARK(BM_DepthHead);

}  // namespace
