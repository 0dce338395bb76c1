#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "stereo3d/costvol.hpp"
#include "stereo3d/errors.hpp"
#include "stereo3d/synth.hpp"

namespace stereo3d {
namespace {

SceneSpec spec_with(std::uint64_t seed, int n) {
  SceneSpec s;
  s.seed = seed;
  s.n_objects = n;
  return s;
}

TEST(GenerateScene, SameSeedIsBitIdentical) {
  const auto a = generate_scene(spec_with(7, 5));
  const auto b = generate_scene(spec_with(7, 5));
  ASSERT_EQ(a.objects.size(), b.objects.size());
  for (std::size_t k = 0; k < a.objects.size(); ++k) EXPECT_EQ(a.objects[k].box, b.objects[k].box);
  EXPECT_EQ(a.left, b.left);
  EXPECT_EQ(a.right, b.right);
  const auto c = generate_scene(spec_with(8, 5));
  EXPECT_NE(a.left, c.left);
}

TEST(GenerateScene, NoObjectsGivesBlankImages) {
  const auto s = generate_scene(spec_with(3, 0));
  EXPECT_TRUE(s.objects.empty());
  for (double v : s.left.pixels()) EXPECT_DOUBLE_EQ(v, s.spec.background);
  EXPECT_EQ(s.left, s.right);
}

TEST(GenerateScene, InvalidSpecThrows) {
  auto s = spec_with(1, 2);
  s.depth = {10.0, 10.0};
  EXPECT_THROW(generate_scene(s), ArgumentError);
  s = spec_with(1, -1);
  EXPECT_THROW(generate_scene(s), ArgumentError);
}

TEST(GenerateScene, SortedNearToFarAndRectified) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = generate_scene(spec_with(seed, 6));
    for (std::size_t k = 1; k < s.objects.size(); ++k)
      EXPECT_LE(s.objects[k - 1].box.z, s.objects[k].box.z);
    for (const auto& o : s.objects) {
      EXPECT_EQ(o.boxes.left.v1, o.boxes.right.v1);
      EXPECT_EQ(o.boxes.left.v2, o.boxes.right.v2);
      EXPECT_NEAR(o.disparity, s.rig.focal_baseline() / o.box.z, 1e-9);
      EXPECT_GE(o.occlusion_level, 0);
      EXPECT_LE(o.occlusion_level, 2);
      const int expected = o.occluded_fraction < 0.1 ? 0 : (o.occluded_fraction < 0.5 ? 1 : 2);
      EXPECT_EQ(o.occlusion_level, expected);
    }
  }
}

// Best horizontal shift of a left-image run against the right image, by SAD
// over integer shifts with a parabolic refinement.
double measured_shift(const GrayImage& l, const GrayImage& r, int u1, int u2, int v1, int v2) {
  std::vector<double> cost;
  for (int d = 0; d <= 200; ++d) {
    double sum = 0.0;
    int count = 0;
    for (int v = v1; v <= v2; ++v)
      for (int u = u1; u <= u2; ++u) {
        if (u - d < 0) continue;
        sum += std::abs(l.at(v, u) - r.at(v, u - d));
        ++count;
      }
    cost.push_back(count ? sum / count : 1e9);
  }
  const auto best = static_cast<std::size_t>(std::min_element(cost.begin(), cost.end()) - cost.begin());
  if (best == 0 || best + 1 == cost.size()) return static_cast<double>(best);
  const double a = cost[best - 1], b = cost[best], c = cost[best + 1];
  const double den = a - 2 * b + c;
  return static_cast<double>(best) + (den > 0 ? 0.5 * (a - c) / den : 0.0);
}

TEST(RenderStereo, PatchShiftMatchesDepth) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto spec = spec_with(seed, 4);
    spec.texture = seed % 2 ? TextureKind::Noise : TextureKind::Checker;
    const auto s = generate_scene(spec);
    for (const auto& o : s.objects) {
      if (!o.has_visible_range || o.occlusion_level > 0) continue;
      const int u1 = static_cast<int>(o.visible_u1) + 1, u2 = static_cast<int>(o.visible_u2) - 1;
      const int v1 = static_cast<int>(std::ceil(o.boxes.left.v1)) + 1;
      const int v2 = static_cast<int>(std::floor(o.boxes.left.v2)) - 1;
      if (u2 - u1 < 6 || v2 - v1 < 4) continue;
      const double d = measured_shift(s.left, s.right, u1, u2, v1, v2);
      EXPECT_NEAR(d, s.rig.focal_baseline() / o.box.z, 0.5) << "seed " << seed;
      ++checked;
    }
  }
  EXPECT_GT(checked, 10);
}

TEST(RenderStereo, NearObjectOverwritesFar) {
  auto spec = spec_with(0, 8);
  spec.lateral = {-1.0, 1.0};  // crowd the objects so they overlap
  spec.max_attempts = 50;
  bool saw_occlusion = false;
  for (std::uint64_t seed = 0; seed < 10 && !saw_occlusion; ++seed) {
    spec.seed = seed;
    const auto s = generate_scene(spec);
    for (std::size_t k = 0; k < s.objects.size(); ++k) {
      if (s.objects[k].occlusion_level == 0) continue;
      saw_occlusion = true;
      // Pixels inside object k's footprint but owned by someone else must be
      // owned by a nearer object.
      const auto& b = s.objects[k].boxes.left;
      for (int v = static_cast<int>(std::ceil(b.v1)); v <= static_cast<int>(b.v2); ++v)
        for (int u = static_cast<int>(std::ceil(b.u1)); u <= static_cast<int>(b.u2); ++u) {
          const int owner = s.left_owner[static_cast<std::size_t>(v) * s.left.width() + u];
          if (owner >= 0 && owner != static_cast<int>(k)) {
            EXPECT_LT(owner, static_cast<int>(k));
          }
        }
    }
  }
  EXPECT_TRUE(saw_occlusion);
}

TEST(RenderStereo, ReRenderMatchesScene) {
  const auto s = generate_scene(spec_with(4, 4));
  const auto r = render_stereo(s);
  EXPECT_EQ(r.left, s.left);
  EXPECT_EQ(r.right, s.right);
}

TEST(OracleFeatures, NoiseFreeArgmaxIsNearestLevel) {
  const auto grid = uniform_depth_grid(5.0, 50.0, 46);
  auto spec = spec_with(0, 5);
  spec.allow_occlusion = false;
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    const auto s = generate_scene(spec);
    const auto of = oracle_features(s, grid, {});
    const auto frig = s.rig.scaled(0.25);
    for (std::size_t k = 0; k < s.objects.size(); ++k) {
      const auto& o = of.objects[k];
      EXPECT_EQ(o.true_level, grid.nearest_level(s.objects[k].box.z));
      const auto cv = build_cost_volume(of.left, of.right, o.roi, o.roi, grid, frig, o.out_h, o.out_w);
      const auto sc = match_scores(cv);
      const auto arg = static_cast<std::size_t>(std::max_element(sc.begin(), sc.end()) - sc.begin());
      EXPECT_EQ(arg, o.true_level);
      EXPECT_NEAR(sc[o.true_level], 1.0, 1e-12);
      ++checked;
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(OracleFeatures, OccludedObjectsMatchOnTheirVisiblePart) {
  // The right view is painted per object at its own disparity, so the part
  // of a far object left uncovered by a nearer one still matches exactly at
  // its level. Only samples whose bilinear support lies inside the footprint
  // rows and the visible columns are used; inside a constant code stamp
  // neighbouring levels can score 1 as well, so this checks the true level's
  // score rather than the argmax.
  const auto grid = uniform_depth_grid(5.0, 50.0, 46);
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto s = generate_scene(spec_with(seed, 5));
    const auto of = oracle_features(s, grid, {});
    const auto frig = s.rig.scaled(0.25);
    for (std::size_t k = 0; k < s.objects.size(); ++k) {
      const auto& obj = s.objects[k];
      if (obj.occlusion_level == 0 || !obj.has_visible_range) continue;
      const auto& o = of.objects[k];
      const double u_lo = to_feature_coord(obj.visible_u1, 0.25);
      const double u_hi = to_feature_coord(obj.visible_u2, 0.25);
      const double v_lo = to_feature_coord(obj.boxes.left.v1, 0.25);
      const double v_hi = to_feature_coord(obj.boxes.left.v2, 0.25);
      auto cols_ok = [&](double x) {
        const double a = std::floor(x - 0.5) + 0.5;
        return a >= u_lo && a + 1.0 <= u_hi;
      };
      int j0 = -1, j1 = -1;
      for (int j = 0; j < static_cast<int>(o.out_w); ++j) {
        if (!cols_ok(o.roi.x0 + j + 0.5)) continue;
        if (j0 < 0) j0 = j;
        j1 = j;
      }
      int i0 = -1, i1 = -1;
      for (int i = 0; i < static_cast<int>(o.out_h); ++i) {
        const double cy = o.roi.y0 + i + 0.5;  // row samples sit on cell centres
        if (cy < v_lo || cy > v_hi) continue;
        if (i0 < 0) i0 = i;
        i1 = i;
      }
      if (j0 < 0 || i0 < 0 || j1 - j0 < 1) continue;
      const Roi roi{o.roi.x0 + j0, o.roi.y0 + i0, o.roi.x0 + j1 + 1, o.roi.y0 + i1 + 1};
      const auto cv = build_cost_volume(of.left, of.right, roi, roi, grid, frig,
                                        static_cast<std::size_t>(i1 - i0 + 1),
                                        static_cast<std::size_t>(j1 - j0 + 1));
      // Visibility is decided per image pixel while features are 4 px
      // cells, so a sliver of a nearer object's edge can blend into a cell
      // at the border of the visible columns. Hence not exactly 1.
      EXPECT_GT(match_scores(cv)[o.true_level], 0.995) << "seed " << seed << " object " << k;
      ++checked;
    }
  }
  EXPECT_GT(checked, 20);
}

TEST(OracleFeatures, ObjectOutsideGridThrows) {
  const auto s = generate_scene(spec_with(2, 3));
  ASSERT_FALSE(s.objects.empty());
  EXPECT_THROW(oracle_features(s, uniform_depth_grid(45.0, 60.0, 4), {}), ArgumentError);
}

TEST(OracleFeatures, ConstantSingleChannelScoresOneEverywhere) {
  const FeatureMap ones(1, 20, 40, 1.0);
  const auto grid = uniform_depth_grid(10.0, 40.0, 7);
  const auto cv = build_cost_volume(ones, ones, {10, 5, 20, 12}, {10, 5, 20, 12}, grid,
                                    kitti_like_rig().scaled(0.25), 7, 10);
  for (double s : match_scores(cv)) EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(Observations, TextRoundTrip) {
  const auto s = generate_scene(spec_with(11, 4));
  std::vector<Observation> obs;
  for (const auto& o : s.objects) obs.push_back(observation_of(o));
  const auto text = write_observations(obs);
  const auto back = parse_observations(text);
  ASSERT_EQ(back.size(), obs.size());
  EXPECT_EQ(write_observations(back), text);
  EXPECT_THROW(parse_observations("Car 1 2 3\n"), ParseError);
}

TEST(SceneLabels, MatchObjectGeometry) {
  const auto s = generate_scene(spec_with(12, 4));
  const auto labels = scene_labels(s);
  ASSERT_EQ(labels.size(), s.objects.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const Box3D b = box_from_record(labels[k]);
    EXPECT_NEAR(b.x, s.objects[k].box.x, 1e-9);
    EXPECT_NEAR(b.z, s.objects[k].box.z, 1e-9);
    EXPECT_NEAR(b.theta, s.objects[k].box.theta, 1e-9);
  }
}

TEST(WriteSceneFrame, ProducesDirectoryLayout) {
  const auto root = std::filesystem::temp_directory_path() / "stereo3d_synth_layout";
  std::filesystem::remove_all(root);
  const auto s = generate_scene(spec_with(5, 2));
  const auto of = oracle_features(s, uniform_depth_grid(5.0, 50.0, 46), {});
  write_scene_frame(root, 3, s, of);
  for (const char* rel : {"calib/000003.txt", "label_2/000003.txt", "image_2/000003.pgm",
                          "image_3/000003.pgm", "observations/000003.txt",
                          "features/000003_left.bin", "features/000003_right.bin"}) {
    EXPECT_TRUE(std::filesystem::exists(root / rel)) << rel;
  }
  const auto left = read_pgm_file(root / "image_2/000003.pgm");
  ASSERT_EQ(left.width(), s.left.width());
  double worst = 0.0;
  for (std::size_t i = 0; i < left.pixels().size(); ++i)
    worst = std::max(worst, std::abs(left.pixels()[i] - s.left.pixels()[i]));
  EXPECT_LE(worst, 0.5 / 65535.0 + 1e-12);
  std::filesystem::remove_all(root);
}

}  // namespace
}  // namespace stereo3d
