#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "stereo3d/solver.hpp"
#include "stereo3d/synth.hpp"

namespace {

using namespace stereo3d;

struct PoseCase {
  Measurements5 m;
  BoxDims dims;
  double z;
  Pose2 init;
  CornerType kp;
};

std::vector<PoseCase> pose_cases(std::size_t n) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> zd(5.0, 60.0), th(-kPi, kPi), lat(-0.3, 0.3);
  std::vector<PoseCase> out;
  for (std::size_t i = 0; i < n; ++i) {
    Box3D b;
    b.z = zd(rng);
    b.x = lat(rng) * b.z;
    b.y = 1.0;
    b.w = 1.7;
    b.h = 1.5;
    b.l = 4.0;
    b.theta = wrap_angle(th(rng));
    const auto kp = static_cast<CornerType>(i % 4);
    out.push_back({project_box(b, kp), {b.w, b.h, b.l}, b.z, {b.x + 0.5, b.y - 0.5, b.theta + 0.1}, kp});
  }
  return out;
}

void BM_EstimateBoxPose(benchmark::State& state) {
  const auto cases = pose_cases(256);
  std::size_t i = 0;
  for (auto _ : state) {
    const PoseCase& c = cases[i++ % cases.size()];
    benchmark::DoNotOptimize(estimate_box_pose(c.m, c.dims, c.z, c.init, c.kp));
  }
}
BENCHMARK(BM_EstimateBoxPose);

void BM_DenseAlign(benchmark::State& state) {
  SceneSpec spec;
  spec.seed = 3;
  spec.n_objects = 1;
  spec.allow_occlusion = false;
  spec.texture = TextureKind::Checker;
  const SyntheticScene scene = generate_scene(spec);
  const SyntheticObject& obj = scene.objects.front();
  const VisibleRange vr = obj.visible_range(scene.rig);
  const double vt = normalize_v(obj.boxes.left.v1, scene.rig);
  const double vb = normalize_v(obj.boxes.left.v2, scene.rig);
  const AlignSearch search{2.0, static_cast<int>(state.range(0))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        dense_align(scene.left, scene.right, vr, vt, vb, obj.box.z + 0.5, search, scene.rig));
  }
}
BENCHMARK(BM_DenseAlign)->Arg(21)->Arg(81);

}  // namespace
