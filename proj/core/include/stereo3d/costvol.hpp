#pragma once

// Instance-level depth estimation on dense tensors: RoI sampling, a local
// plane-sweep cost volume over a uniform depth grid, cosine match
// reweighting, BEV structure-aware attention, a small 3D-conv depth head and
// the expectation readout.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "stereo3d/geometry.hpp"
#include "stereo3d/tensor.hpp"

namespace stereo3d {

/// Axis-aligned rectangle in feature coordinates.
struct Roi {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool valid() const { return x1 > x0 && y1 > y0; }
  Roi shifted(double dx) const { return {x0 + dx, y0, x1 + dx, y1}; }
  bool operator==(const Roi&) const = default;
};

/// One bilinear sample per output cell center; samples past the map border
/// clamp to the outermost cells.
FeatureMap roi_align(const FeatureMap& fm, const Roi& roi, std::size_t out_h,
                     std::size_t out_w);

class CostVolume {
 public:
  /// block has shape (2C, n, h, w) with n == grid.size().
  CostVolume(DepthGrid grid, Tensor block, Roi left_roi, Roi right_roi);

  const DepthGrid& grid() const { return grid_; }
  const Tensor& block() const { return block_; }
  Tensor& block() { return block_; }
  const Roi& left_roi() const { return left_roi_; }
  const Roi& right_roi() const { return right_roi_; }

  std::size_t channels() const { return block_.dim(0); }
  std::size_t half_channels() const { return block_.dim(0) / 2; }
  std::size_t levels() const { return block_.dim(1); }
  std::size_t height() const { return block_.dim(2); }
  std::size_t width() const { return block_.dim(3); }

  double& at(std::size_t c, std::size_t level, std::size_t y, std::size_t x) {
    return block_[((c * levels() + level) * height() + y) * width() + x];
  }
  double at(std::size_t c, std::size_t level, std::size_t y, std::size_t x) const {
    return block_[((c * levels() + level) * height() + y) * width() + x];
  }

 private:
  DepthGrid grid_;
  Tensor block_;
  Roi left_roi_;
  Roi right_roi_;
};

/// Level i concatenates the left patch with the right patch sampled from
/// right_roi translated by -disparity(z_i). `rig` must be expressed in the
/// feature maps' coordinates (see CameraRig::scaled). right_roi is given in
/// the zero-disparity frame, i.e. usually equal to left_roi.
CostVolume build_cost_volume(const FeatureMap& left, const FeatureMap& right,
                             const Roi& left_roi, const Roi& right_roi,
                             const DepthGrid& grid, const CameraRig& rig,
                             std::size_t out_h, std::size_t out_w);

/// Cosine similarity between the flattened left and right halves of every
/// level. A zero-norm half scores 0.
std::vector<double> match_scores(const CostVolume& cv);

/// Scales every level slice by its match score.
CostVolume match_reweight(const CostVolume& cv);

struct Conv2d {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  std::vector<double> weights;  // (out, in, k, k)
  std::vector<double> bias;     // (out)
};

struct Conv3d {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  std::vector<double> weights;  // (out, in, k, k, k)
  std::vector<double> bias;     // (out)
};

struct ConvStackShape {
  std::size_t hidden = 8;
  std::size_t kernel = 3;
  /// Scale of the attention kernel relative to its fan-in bound.
  double attention_gain = 0.1;
};

/// Fixed-weight two-stage head. Weights are drawn from `seed`; the same seed
/// and shape always give bit-identical kernels.
struct ConvStack {
  std::array<Conv3d, 2> stage1;
  std::array<Conv3d, 2> stage2;
  Conv3d reduce;    // hidden -> 1, kernel 1
  Conv2d attention; // 2C -> 2C over the (level, width) BEV plane
  std::uint64_t seed = 0;

  /// `in_channels` is the cost volume channel count 2C.
  static ConvStack random(std::size_t in_channels, std::uint64_t seed,
                          const ConvStackShape& shape = {});
};

/// G_a = sigmoid(conv(mean_h(G))) * G + G. Throws ArgumentError when the
/// kernel channels do not match the volume.
CostVolume structure_attention(const CostVolume& cv, const Conv2d& kernel);

class DepthPMF {
 public:
  /// Throws ArgumentError unless p is a normalized distribution over grid.
  DepthPMF(DepthGrid grid, std::vector<double> p);
  static DepthPMF from_logits(DepthGrid grid, std::span<const double> logits);

  const DepthGrid& grid() const { return grid_; }
  std::span<const double> p() const { return p_; }
  double operator[](std::size_t i) const { return p_[i]; }
  std::size_t size() const { return p_.size(); }
  std::size_t argmax() const;

 private:
  DepthGrid grid_;
  std::vector<double> p_;
};

std::vector<double> softmax(std::span<const double> logits);

/// Replaces the convolutional stack: receives the volume entering the head
/// and returns one logit per depth level.
using LogitHook = std::function<std::vector<double>(const CostVolume&)>;

/// Pre-softmax logits of the convolutional head: two conv+ReLU blocks, 2x
/// spatial max pool, two conv+ReLU blocks, 4x spatial max pool, 1x1x1
/// reduction to one channel, then a spatial mean per level.
std::vector<double> head_logits(const CostVolume& cv, const ConvStack& stack);

/// Softmax over levels of head_logits, or of `bypass` when it is set.
DepthPMF depth_head(const CostVolume& cv, const ConvStack& stack,
                    const LogitHook& bypass = {});

/// Fixed readout for untrained pipelines: per-level mean left/right channel
/// correlation, min-max normalized onto [-sharpness, 0].
std::vector<double> correlation_logits(const CostVolume& cv, double sharpness);

/// Sum_i z_i p_i, clamped to [z_min, z_max] against rounding.
double expected_depth(const DepthPMF& pmf);

struct ExpectedDepthGrad {
  std::vector<double> d_prob;   // dz/dp_i = z_i
  std::vector<double> d_logit;  // dz/dlogit_j = p_j (z_j - z_hat)
};
ExpectedDepthGrad expected_depth_grad(const DepthPMF& pmf);

/// Mean absolute depth error.
double depth_loss(std::span<const double> pred, std::span<const double> gt);

}  // namespace stereo3d
