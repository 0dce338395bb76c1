#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "stereo3d/costvol.hpp"
#include "stereo3d/errors.hpp"

namespace stereo3d {
namespace {

FeatureMap random_map(std::size_t c, std::size_t h, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  FeatureMap fm(c, h, w);
  for (auto& v : fm.tensor().data()) v = n(rng);
  return fm;
}

CostVolume random_volume(std::size_t c2, std::size_t n, std::size_t h, std::size_t w,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Tensor t({c2, n, h, w});
  for (auto& v : t.data()) v = nd(rng);
  return CostVolume(uniform_depth_grid(5.0, 50.0, n), std::move(t), {0, 0, 1, 1}, {0, 0, 1, 1});
}

TEST(RoiAlign, ConstantMapStaysConstant) {
  const FeatureMap fm(3, 6, 9, 7.0);
  const auto out = roi_align(fm, {1.3, 0.2, 7.9, 5.1}, 4, 5);
  for (double v : out.tensor().data()) EXPECT_DOUBLE_EQ(v, 7.0);
}

TEST(RoiAlign, IntegerRoiIsExactCopy) {
  const auto fm = random_map(2, 8, 10, 1);
  const auto out = roi_align(fm, {2.0, 1.0, 7.0, 5.0}, 4, 5);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 0; x < 5; ++x) EXPECT_DOUBLE_EQ(out.at(c, y, x), fm.at(c, y + 1, x + 2));
}

TEST(RoiAlign, HandBilinearAtMapCenter) {
  FeatureMap fm(1, 2, 2);
  fm.at(0, 0, 0) = 0;
  fm.at(0, 0, 1) = 1;
  fm.at(0, 1, 0) = 2;
  fm.at(0, 1, 1) = 3;
  const auto out = roi_align(fm, {0.5, 0.5, 1.5, 1.5}, 1, 1);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 0), 1.5);
}

TEST(RoiAlign, OutputBoundedByInputRange) {
  const auto fm = random_map(1, 12, 12, 3);
  const auto [lo, hi] = std::minmax_element(fm.tensor().data().begin(), fm.tensor().data().end());
  const auto out = roi_align(fm, {-3.0, -2.0, 15.5, 13.25}, 7, 9);  // partly off-map: clamps
  for (double v : out.tensor().data()) {
    EXPECT_GE(v, *lo);
    EXPECT_LE(v, *hi);
  }
}

TEST(RoiAlign, InvalidArgumentsThrow) {
  const FeatureMap fm(1, 4, 4);
  EXPECT_THROW(roi_align(fm, {1, 1, 1, 3}, 2, 2), ArgumentError);
  EXPECT_THROW(roi_align(fm, {0, 0, 2, 2}, 0, 2), ArgumentError);
}

// fu * b = 60 puts the grid {10, 20, 30} at integer disparities {6, 3, 2}.
const CameraRig kFeatRig(60.0, 60.0, 0.0, 0.0, 1.0);

TEST(BuildCostVolume, PreShiftedRightMatchesAtItsLevel) {
  const auto grid = uniform_depth_grid(10.0, 30.0, 3);
  const auto left = random_map(4, 6, 24, 9);
  FeatureMap right(4, 6, 24);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t y = 0; y < 6; ++y)
      for (std::size_t x = 0; x + 3 < 24; ++x) right.at(c, y, x) = left.at(c, y, x + 3);
  const Roi roi{10.0, 1.0, 18.0, 5.0};
  const auto cv = build_cost_volume(left, right, roi, roi, grid, kFeatRig, 4, 8);
  ASSERT_EQ(cv.channels(), 8u);
  ASSERT_EQ(cv.levels(), 3u);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 0; x < 8; ++x) EXPECT_DOUBLE_EQ(cv.at(c, 1, y, x), cv.at(c + 4, 1, y, x));
  const auto s = match_scores(cv);
  EXPECT_NEAR(s[1], 1.0, 1e-12);
  EXPECT_LT(s[0], 0.9);
  EXPECT_LT(s[2], 0.9);
}

TEST(BuildCostVolume, TwoLevelShapeAndConstantSlices) {
  const auto grid = uniform_depth_grid(10.0, 20.0, 2);
  const FeatureMap left(2, 5, 20, 0.5);
  const FeatureMap right(2, 5, 20, -1.25);
  const auto cv = build_cost_volume(left, right, {4, 1, 12, 4}, {4, 1, 12, 4}, grid, kFeatRig, 3, 6);
  EXPECT_EQ(cv.levels(), 2u);
  EXPECT_EQ(cv.height(), 3u);
  EXPECT_EQ(cv.width(), 6u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t y = 0; y < 3; ++y)
      for (std::size_t x = 0; x < 6; ++x) {
        EXPECT_DOUBLE_EQ(cv.at(0, i, y, x), 0.5);
        EXPECT_DOUBLE_EQ(cv.at(3, i, y, x), -1.25);
      }
}

CostVolume halves_volume(const std::vector<double>& l, const std::vector<double>& r) {
  // One level, C = 1, 1 x k patch.
  const std::size_t k = l.size();
  std::vector<double> data(l);
  data.insert(data.end(), r.begin(), r.end());
  return CostVolume(uniform_depth_grid(1.0, 2.0, 2),
                    Tensor({2, 2, 1, k / 2}, std::move(data)), {0, 0, 1, 1}, {0, 0, 1, 1});
}

TEST(MatchScores, CosineCases) {
  // Layout (c, level, x) with two levels of two samples each.
  const auto same = halves_volume({1, 2, 3, 4}, {1, 2, 3, 4});
  for (double s : match_scores(same)) EXPECT_NEAR(s, 1.0, 1e-15);
  const auto scaled = halves_volume({1, 2, 3, 4}, {2, 4, 0.5, 2.0 / 3.0});
  for (double s : match_scores(scaled)) EXPECT_NEAR(s, 1.0, 1e-15);
  const auto ortho = halves_volume({1, 0, 0, 5}, {0, 3, 5, 0});
  for (double s : match_scores(ortho)) EXPECT_DOUBLE_EQ(s, 0.0);
  const auto anti = halves_volume({1, -2, 3, 4}, {-1, 2, -3, -4});
  for (double s : match_scores(anti)) EXPECT_NEAR(s, -1.0, 1e-15);
  const auto zero = halves_volume({0, 0, 3, 4}, {1, 1, 3, 4});
  const auto zs = match_scores(zero);
  EXPECT_DOUBLE_EQ(zs[0], 0.0);
  EXPECT_NEAR(zs[1], 1.0, 1e-15);
}

TEST(MatchScores, BoundedOnRandomVolumes) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (double s : match_scores(random_volume(6, 5, 3, 4, seed))) {
      EXPECT_GE(s, -1.0);
      EXPECT_LE(s, 1.0);
    }
  }
}

TEST(MatchReweight, ScalesLevelsByScore) {
  const auto same = halves_volume({1, 2, 3, 4}, {1, 2, 3, 4});
  const auto same_rw = match_reweight(same);
  ASSERT_EQ(same_rw.block().size(), same.block().size());
  for (std::size_t i = 0; i < same.block().size(); ++i)
    EXPECT_NEAR(same_rw.block()[i], same.block()[i], 1e-14 * std::abs(same.block()[i]));
  const auto mixed = halves_volume({1, 0, 3, 4}, {0, 3, 3, 4});
  const auto rw = match_reweight(mixed);
  EXPECT_DOUBLE_EQ(rw.at(0, 0, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(rw.at(1, 0, 0, 0), 0.0);
  EXPECT_NEAR(rw.at(0, 1, 0, 1), 4.0, 1e-12);

  const auto cv = random_volume(4, 6, 3, 5, 77);
  const auto s = match_scores(cv);
  const auto r = match_reweight(cv);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t y = 0; y < 3; ++y)
        for (std::size_t x = 0; x < 5; ++x)
          EXPECT_DOUBLE_EQ(r.at(c, i, y, x), cv.at(c, i, y, x) * s[i]);
}

TEST(StructureAttention, ZeroKernelGivesOneAndAHalf) {
  const auto cv = random_volume(4, 5, 3, 6, 8);
  auto stack = ConvStack::random(4, 3);
  std::fill(stack.attention.weights.begin(), stack.attention.weights.end(), 0.0);
  std::fill(stack.attention.bias.begin(), stack.attention.bias.end(), 0.0);
  const auto out = structure_attention(cv, stack.attention);
  ASSERT_EQ(out.block().shape().size(), 4u);
  for (std::size_t k = 0; k < cv.block().size(); ++k)
    EXPECT_DOUBLE_EQ(out.block()[k], 1.5 * cv.block()[k]);
}

TEST(StructureAttention, ZeroInputStaysZero) {
  const CostVolume cv(uniform_depth_grid(5, 10, 3), Tensor({4, 3, 2, 2}), {0, 0, 1, 1},
                      {0, 0, 1, 1});
  const auto stack = ConvStack::random(4, 12);
  const auto out = structure_attention(cv, stack.attention);
  for (double v : out.block().data()) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(StructureAttention, GateKeepsOutputBetweenInputAndDouble) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto cv = random_volume(4, 5, 3, 4, 1000 + seed);
    const auto stack = ConvStack::random(4, seed, {8, 3, 5.0});
    const auto out = structure_attention(cv, stack.attention);
    for (std::size_t k = 0; k < cv.block().size(); ++k) {
      const double g = cv.block()[k];
      EXPECT_GE(out.block()[k], std::min(g, 2 * g));
      EXPECT_LE(out.block()[k], std::max(g, 2 * g));
    }
  }
}

TEST(StructureAttention, ChannelMismatchThrows) {
  const auto cv = random_volume(4, 5, 3, 4, 2);
  const auto stack = ConvStack::random(6, 1);
  EXPECT_THROW(structure_attention(cv, stack.attention), ArgumentError);
}

TEST(DepthHead, ProducesDistribution) {
  const auto stack = ConvStack::random(6, 4);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pmf = depth_head(random_volume(6, 9, 8, 8, seed), stack);
    double sum = 0.0;
    for (double p : pmf.p()) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(DepthHead, BypassOneHotLogits) {
  const auto stack = ConvStack::random(6, 4);
  const auto cv = random_volume(6, 7, 4, 4, 3);
  const auto pmf = depth_head(cv, stack, [](const CostVolume& v) {
    std::vector<double> logits(v.levels(), -1000.0);
    logits[4] = 0.0;
    return logits;
  });
  EXPECT_EQ(pmf.argmax(), 4u);
  EXPECT_NEAR(pmf[4], 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(expected_depth(pmf), cv.grid()[4]);
}

TEST(DepthHead, DeterministicFromSeed) {
  const auto cv = random_volume(6, 9, 8, 8, 31);
  const auto a = depth_head(cv, ConvStack::random(6, 42));
  const auto b = depth_head(cv, ConvStack::random(6, 42));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  const auto c = depth_head(cv, ConvStack::random(6, 43));
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i] != c[i];
  EXPECT_TRUE(differs);
}

TEST(DepthHead, CorrelationReadoutPeaksAtMatchedLevel) {
  const auto grid = uniform_depth_grid(10.0, 30.0, 3);
  const auto left = random_map(4, 6, 24, 19);
  FeatureMap right(4, 6, 24);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t y = 0; y < 6; ++y)
      for (std::size_t x = 0; x + 6 < 24; ++x) right.at(c, y, x) = left.at(c, y, x + 6);
  const Roi roi{10.0, 1.0, 18.0, 5.0};
  const auto cv = build_cost_volume(left, right, roi, roi, grid, kFeatRig, 4, 8);
  const auto logits = correlation_logits(cv, 20.0);
  EXPECT_DOUBLE_EQ(logits[0], 0.0);
  EXPECT_DOUBLE_EQ(*std::min_element(logits.begin(), logits.end()), -20.0);
  const auto pmf = depth_head(cv, ConvStack::random(8, 1),
                              [](const CostVolume& v) { return correlation_logits(v, 20.0); });
  EXPECT_EQ(pmf.argmax(), 0u);
}

TEST(ExpectedDepth, Examples) {
  const auto g = uniform_depth_grid(10.0, 30.0, 3);
  EXPECT_DOUBLE_EQ(expected_depth(DepthPMF(g, {0, 1, 0})), 20.0);
  EXPECT_DOUBLE_EQ(expected_depth(DepthPMF(g, {0, 0, 1})), 30.0);
  EXPECT_NEAR(expected_depth(DepthPMF(g, {1.0 / 3, 1.0 / 3, 1.0 / 3})), 20.0, 1e-12);
  EXPECT_DOUBLE_EQ(expected_depth(DepthPMF(g, {0.25, 0.25, 0.5})), 22.5);
  EXPECT_THROW(DepthPMF(g, {0.5, 0.2, 0.2}), ArgumentError);
  EXPECT_THROW(DepthPMF(g, {-0.1, 0.6, 0.5}), ArgumentError);
}

TEST(ExpectedDepthGrad, UniformDistribution) {
  const auto g = uniform_depth_grid(10.0, 30.0, 3);
  const auto grad = expected_depth_grad(DepthPMF(g, {1.0 / 3, 1.0 / 3, 1.0 / 3}));
  EXPECT_NEAR(grad.d_logit[0], -10.0 / 3.0, 1e-12);
  EXPECT_NEAR(grad.d_logit[1], 0.0, 1e-12);
  EXPECT_NEAR(grad.d_logit[2], 10.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(grad.d_prob[2], 30.0);
}

TEST(ExpectedDepthGrad, DeltaDistributionHasZeroLogitGradient) {
  const auto g = uniform_depth_grid(10.0, 30.0, 3);
  for (double v : expected_depth_grad(DepthPMF(g, {0, 1, 0})).d_logit) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(ExpectedDepthGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 2.0);
  const auto g = uniform_depth_grid(5.0, 50.0, 12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> logits(g.size());
    for (auto& v : logits) v = nd(rng);
    const auto grad = expected_depth_grad(DepthPMF::from_logits(g, logits));
    const double h = 1e-5;
    for (std::size_t j = 0; j < logits.size(); ++j) {
      auto up = logits;
      auto dn = logits;
      up[j] += h;
      dn[j] -= h;
      const double fd = (expected_depth(DepthPMF::from_logits(g, up)) -
                         expected_depth(DepthPMF::from_logits(g, dn))) / (2 * h);
      EXPECT_NEAR(grad.d_logit[j], fd, 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Softmax, StableForLargeLogits) {
  const auto p = softmax(std::vector<double>{1000.0, 1000.0, -1000.0});
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[2], 0.0, 1e-300);
}

TEST(DepthLoss, Examples) {
  EXPECT_DOUBLE_EQ(depth_loss(std::vector<double>{3, 4}, std::vector<double>{3, 4}), 0.0);
  EXPECT_DOUBLE_EQ(depth_loss(std::vector<double>{10, 20}, std::vector<double>{12, 18}), 2.0);
  EXPECT_DOUBLE_EQ(depth_loss(std::vector<double>{7.5}, std::vector<double>{2.0}), 5.5);
  EXPECT_THROW(depth_loss(std::vector<double>{}, std::vector<double>{}), ArgumentError);
  EXPECT_THROW(depth_loss(std::vector<double>{1}, std::vector<double>{1, 2}), ArgumentError);
}

TEST(TensorDump, RoundTripsThroughFloat32) {
  Tensor t({2, 3}, {0.5, -1.25, 3.0, 1e-3, 7.0, -0.0});
  std::stringstream ss;
  write_tensor(ss, t);
  EXPECT_EQ(ss.str().substr(0, 11), "shape: 2 3\n");
  const Tensor back = read_tensor(ss);
  ASSERT_EQ(back.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i)
    EXPECT_EQ(back[i], static_cast<double>(static_cast<float>(t[i])));
}

}  // namespace
}  // namespace stereo3d
