#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "stereo3d/errors.hpp"
#include "stereo3d/targets.hpp"

namespace stereo3d {
namespace {

TargetConfig small_config(int classes = 1) {
  TargetConfig cfg;
  cfg.image_width = 128;
  cfg.image_height = 64;
  cfg.num_classes = classes;
  return cfg;
}

TEST(GaussianRadius, ReferenceValues) {
  // Values of the widely used center-heatmap radius helper, quirks included.
  EXPECT_NEAR(gaussian_radius(10, 10, 0.7), 2.7332005306815113, 1e-12);
  EXPECT_NEAR(gaussian_radius(20, 8, 0.7), 3.171912523984453, 1e-12);
  EXPECT_LT(gaussian_radius(10, 10, 0.9), gaussian_radius(10, 10, 0.5));
}

TEST(GaussianHeatmap, SinglePeakAndRange) {
  const auto cfg = small_config();
  const std::vector<HeatmapCenter> c{{10, 7, 0, 12.0, 9.0}};
  const auto hm = gaussian_heatmap(c, cfg);
  EXPECT_EQ(hm.width(), 32);
  EXPECT_EQ(hm.height(), 16);
  int ones = 0;
  for (double v : hm.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    ones += v == 1.0;
  }
  EXPECT_EQ(ones, 1);
  EXPECT_DOUBLE_EQ(hm.at(0, 7, 10), 1.0);
  EXPECT_GT(hm.at(0, 7, 11), 0.0);
  EXPECT_LT(hm.at(0, 7, 11), 1.0);
  EXPECT_DOUBLE_EQ(hm.at(0, 7, 11), hm.at(0, 7, 9));
}

TEST(GaussianHeatmap, NeighbouringCentersMaxCombine) {
  const auto cfg = small_config();
  const std::vector<HeatmapCenter> both{{10, 7, 0, 12, 12}, {11, 7, 0, 12, 12}};
  const std::vector<HeatmapCenter> first{{10, 7, 0, 12, 12}};
  const std::vector<HeatmapCenter> second{{11, 7, 0, 12, 12}};
  const auto hb = gaussian_heatmap(both, cfg);
  const auto h1 = gaussian_heatmap(first, cfg);
  const auto h2 = gaussian_heatmap(second, cfg);
  EXPECT_DOUBLE_EQ(hb.at(0, 7, 10), 1.0);
  EXPECT_DOUBLE_EQ(hb.at(0, 7, 11), 1.0);
  for (std::size_t i = 0; i < hb.values().size(); ++i)
    EXPECT_DOUBLE_EQ(hb.values()[i], std::max(h1.values()[i], h2.values()[i]));
}

TEST(GaussianHeatmap, OutOfBoundsCenterThrows) {
  const auto cfg = small_config();
  const std::vector<HeatmapCenter> bad{{32, 0, 0, 4, 4}};
  EXPECT_THROW(gaussian_heatmap(bad, cfg), ArgumentError);
  const std::vector<HeatmapCenter> bad_cls{{3, 3, 1, 4, 4}};
  EXPECT_THROW(gaussian_heatmap(bad_cls, cfg), ArgumentError);
}

TEST(FocalLoss, SinglePeakHandValue) {
  const auto cfg = small_config();
  Heatmap target(1, 16, 32);
  target.at(0, 5, 5) = 1.0;
  Heatmap pred(1, 16, 32);
  pred.at(0, 5, 5) = 0.5;
  EXPECT_NEAR(focal_loss(pred, target, cfg), 0.25 * std::log(2.0), 1e-12);
}

TEST(FocalLoss, PerfectPredictionApproachesZero) {
  const auto cfg = small_config();
  const std::vector<HeatmapCenter> c{{10, 7, 0, 12, 9}};
  const auto target = gaussian_heatmap(c, cfg);
  Heatmap pred(1, 16, 32);
  for (std::size_t i = 0; i < pred.values().size(); ++i)
    pred.values()[i] = target.values()[i] == 1.0 ? 1.0 - 1e-9 : 1e-9;
  const double loss = focal_loss(pred, target, cfg);
  EXPECT_GE(loss, 0.0);
  EXPECT_LT(loss, 1e-12);
}

TEST(FocalLoss, ChannelSwapInvariant) {
  const auto cfg = small_config(2);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  const std::vector<HeatmapCenter> c{{4, 4, 0, 8, 8}, {20, 10, 1, 8, 8}};
  const auto target = gaussian_heatmap(c, cfg);
  Heatmap pred(2, 16, 32);
  for (auto& v : pred.values()) v = u(rng);
  Heatmap ts(2, 16, 32), ps(2, 16, 32);
  for (int k = 0; k < 2; ++k)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 32; ++x) {
        ts.at(1 - k, y, x) = target.at(k, y, x);
        ps.at(1 - k, y, x) = pred.at(k, y, x);
      }
  EXPECT_NEAR(focal_loss(pred, target, cfg), focal_loss(ps, ts, cfg), 1e-12);
  EXPECT_GT(focal_loss(pred, target, cfg), 0.0);
}

TEST(FocalLoss, ShapeMismatchThrows) {
  const auto cfg = small_config();
  EXPECT_THROW(focal_loss(Heatmap(1, 16, 32), Heatmap(1, 16, 31), cfg), ArgumentError);
}

TEST(StereoTargets, CellAlignedCenterHasZeroOffsets) {
  const auto cfg = small_config();
  const PixelBox left{30, 12, 50, 28};   // center (40, 20), both multiples of R
  const PixelBox right{20, 12, 36, 28};  // center u 28
  const auto sb = encode_stereo_targets(left, right, cfg);
  EXPECT_EQ(sb.cx, 10);
  EXPECT_EQ(sb.cy, 5);
  EXPECT_DOUBLE_EQ(sb.o_ul, 0.0);
  EXPECT_DOUBLE_EQ(sb.o_v, 0.0);
  EXPECT_DOUBLE_EQ(sb.o_ur, -3.0);
  EXPECT_DOUBLE_EQ(sb.w_l, 5.0);
  EXPECT_DOUBLE_EQ(sb.w_r, 4.0);
  EXPECT_DOUBLE_EQ(sb.h, 4.0);
}

TEST(StereoTargets, SharedHeightDecodesToBothViews) {
  const auto cfg = small_config();
  StereoBox2D sb{7, 3, 0.25, -1.5, 0.75, 4.0, 3.5, 2.5};
  const auto pair = decode_stereo_targets(sb, cfg);
  EXPECT_DOUBLE_EQ(pair.left.height(), 10.0);
  EXPECT_DOUBLE_EQ(pair.right.height(), 10.0);
  EXPECT_DOUBLE_EQ(pair.left.v1, pair.right.v1);
  EXPECT_DOUBLE_EQ(pair.left.center_u(), (7 + 0.25) * 4);
}

TEST(StereoTargets, RoundTripRandomRectifiedPairs) {
  const auto cfg = small_config();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 100), v(0, 40), w(2, 30), h(2, 20), d(0, 25);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double lu = u(rng), lv = v(rng), lw = w(rng), hh = h(rng);
    const double rw = lw * (0.9 + 0.2 * (d(rng) / 25.0));
    const PixelBox left{lu, lv, lu + lw, lv + hh};
    const double ru = lu - d(rng) + 0.5 * (lw - rw);
    const PixelBox right{ru, lv, ru + rw, lv + hh};
    const auto back = decode_stereo_targets(encode_stereo_targets(left, right, cfg), cfg);
    for (auto [a, b] : {std::pair{back.left, left}, std::pair{back.right, right}}) {
      worst = std::max({worst, std::abs(a.u1 - b.u1), std::abs(a.u2 - b.u2),
                        std::abs(a.v1 - b.v1), std::abs(a.v2 - b.v2)});
    }
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(StereoTargets, VerticalMisalignmentThrows) {
  const auto cfg = small_config();
  EXPECT_THROW(encode_stereo_targets({10, 10, 20, 20}, {5, 10.6, 15, 20.6}, cfg),
               RectificationError);
  EXPECT_NO_THROW(encode_stereo_targets({10, 10, 20, 20}, {5, 10.4, 15, 20.4}, cfg));
}

TEST(L1Loss, Examples) {
  EXPECT_DOUBLE_EQ(l1_loss(std::vector<double>{1, 2}, std::vector<double>{1, 2}), 0.0);
  EXPECT_DOUBLE_EQ(l1_loss(std::vector<double>{1, 2}, std::vector<double>{2, 4}), 1.5);
  EXPECT_DOUBLE_EQ(l1_loss(std::vector<double>{-3}, std::vector<double>{4}), 7.0);
  EXPECT_THROW(l1_loss(std::vector<double>{1}, std::vector<double>{1, 2}), ArgumentError);
}

TEST(TotalLoss, WeightedSum) {
  const LossParts ones{1, 1, 1, 1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(total_loss(ones, {}), 7.0);
  LossWeights w;
  w.depth = 0.0;
  EXPECT_DOUBLE_EQ(total_loss(ones, w), 6.0);
  const LossParts p{0.3, 1.2, 0.7, 2.5, 0.1, 0.9, 4.0};
  const LossParts p2{0.6, 2.4, 1.4, 5.0, 0.2, 1.8, 8.0};
  const LossWeights ww{0.5, 2, 1, 0.25, 3, 1, 0.1};
  EXPECT_DOUBLE_EQ(total_loss(p2, ww), 2.0 * total_loss(p, ww));
}

}  // namespace
}  // namespace stereo3d
