#pragma once

// Training-target encoders and loss formulas for the center-based stereo
// detector: class heatmaps, stereo box offsets and sizes, and the weighted
// multi-task sum.

#include <cstddef>
#include <span>
#include <vector>

#include "stereo3d/geometry.hpp"
#include "stereo3d/tensor.hpp"

namespace stereo3d {

struct TargetConfig {
  int downsample = 4;       // R; heatmap is floor(W / R) x floor(H / R)
  int image_width = 1242;
  int image_height = 375;
  int num_classes = 1;
  double min_overlap = 0.7;  // gaussian radius rule
  double focal_alpha = 2.0;
  double focal_beta = 4.0;

  int heatmap_width() const { return image_width / downsample; }
  int heatmap_height() const { return image_height / downsample; }
  /// Throws ArgumentError on non-positive sizes.
  void validate() const;
};

/// Heatmap center with the object's 2D box size in heatmap cells, which sets
/// the gaussian radius.
struct HeatmapCenter {
  int cx = 0;
  int cy = 0;
  int cls = 0;
  double box_w = 1.0;
  double box_h = 1.0;
};

/// Class-first (C, H/R, W/R) heatmap.
class Heatmap {
 public:
  Heatmap(int classes, int height, int width);

  int classes() const { return classes_; }
  int height() const { return height_; }
  int width() const { return width_; }

  double& at(int c, int y, int x) { return values_[index(c, y, x)]; }
  double at(int c, int y, int x) const { return values_[index(c, y, x)]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  Tensor to_tensor() const;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * static_cast<std::size_t>(height_) +
            static_cast<std::size_t>(y)) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int classes_;
  int height_;
  int width_;
  std::vector<double> values_;
};

/// Radius from the min-overlap rule used by center-based detectors.
double gaussian_radius(double box_h, double box_w, double min_overlap);

/// Splats one gaussian per center (peak 1, sigma = diameter / 6) and keeps the
/// elementwise max where splats overlap.
Heatmap gaussian_heatmap(std::span<const HeatmapCenter> centers, const TargetConfig& cfg);

/// Penalty-reduced focal loss normalized by the number of target peaks.
/// Predictions are clamped into [1e-12, 1 - 1e-12] before taking logs.
double focal_loss(const Heatmap& pred, const Heatmap& target, const TargetConfig& cfg);

/// Stereo 2D box targets, all in heatmap cells.
struct StereoBox2D {
  int cx = 0;
  int cy = 0;
  double o_ul = 0.0;  // left-box center u minus cx
  double o_ur = 0.0;  // right-box center u minus cx
  double o_v = 0.0;   // shared center v minus cy
  double w_l = 0.0;
  double w_r = 0.0;
  double h = 0.0;
};

inline constexpr double kRectificationTolerancePx = 0.5;

/// Center cell anchors on the left box center. Throws RectificationError when
/// the box centers differ vertically by more than 0.5 px.
StereoBox2D encode_stereo_targets(const PixelBox& left, const PixelBox& right,
                                  const TargetConfig& cfg);
StereoBoxPair decode_stereo_targets(const StereoBox2D& sb, const TargetConfig& cfg);

double l1_loss(std::span<const double> pred, std::span<const double> gt);

struct LossParts {
  double cls = 0.0;
  double off = 0.0;
  double size = 0.0;
  double dim = 0.0;
  double theta = 0.0;
  double kpts = 0.0;
  double depth = 0.0;
};

struct LossWeights {
  double cls = 1.0;
  double off = 1.0;
  double size = 1.0;
  double dim = 1.0;
  double theta = 1.0;
  double kpts = 1.0;
  double depth = 1.0;
};

double total_loss(const LossParts& parts, const LossWeights& w);

}  // namespace stereo3d
