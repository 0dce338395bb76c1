#include "stereo3d/targets.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stereo3d/errors.hpp"

namespace stereo3d {

void TargetConfig::validate() const {
  if (downsample < 1 || image_width < downsample || image_height < downsample ||
      num_classes < 1) {
    throw ArgumentError("TargetConfig needs R >= 1, image >= R and >= 1 class");
  }
  if (!(min_overlap > 0.0 && min_overlap < 1.0)) {
    throw ArgumentError("TargetConfig min_overlap must lie in (0, 1)");
  }
}

Heatmap::Heatmap(int classes, int height, int width)
    : classes_(classes), height_(height), width_(width) {
  if (classes < 1 || height < 1 || width < 1) {
    throw ArgumentError("heatmap dimensions must be >= 1");
  }
  values_.assign(static_cast<std::size_t>(classes) * static_cast<std::size_t>(height) *
                     static_cast<std::size_t>(width),
                 0.0);
}

Tensor Heatmap::to_tensor() const {
  return Tensor({static_cast<std::size_t>(classes_), static_cast<std::size_t>(height_),
                 static_cast<std::size_t>(width_)},
                values_);
}

double gaussian_radius(double box_h, double box_w, double min_overlap) {
  const double b1 = box_h + box_w;
  const double c1 = box_w * box_h * (1.0 - min_overlap) / (1.0 + min_overlap);
  const double r1 = (b1 + std::sqrt(b1 * b1 - 4.0 * c1)) / 2.0;

  const double b2 = 2.0 * (box_h + box_w);
  const double c2 = (1.0 - min_overlap) * box_w * box_h;
  const double r2 = (b2 + std::sqrt(b2 * b2 - 16.0 * c2)) / 2.0;

  const double a3 = 4.0 * min_overlap;
  const double b3 = -2.0 * min_overlap * (box_h + box_w);
  const double c3 = (min_overlap - 1.0) * box_w * box_h;
  const double r3 = (b3 + std::sqrt(b3 * b3 - 4.0 * a3 * c3)) / 2.0;
  return std::min({r1, r2, r3});
}

Heatmap gaussian_heatmap(std::span<const HeatmapCenter> centers, const TargetConfig& cfg) {
  cfg.validate();
  Heatmap map(cfg.num_classes, cfg.heatmap_height(), cfg.heatmap_width());
  for (const HeatmapCenter& c : centers) {
    if (c.cx < 0 || c.cx >= map.width() || c.cy < 0 || c.cy >= map.height() || c.cls < 0 ||
        c.cls >= map.classes()) {
      throw ArgumentError("heatmap center (" + std::to_string(c.cx) + ", " +
                          std::to_string(c.cy) + ") class " + std::to_string(c.cls) +
                          " is out of bounds");
    }
    const int radius =
        std::max(0, static_cast<int>(gaussian_radius(c.box_h, c.box_w, cfg.min_overlap)));
    const double sigma = (2.0 * radius + 1.0) / 6.0;
    for (int dy = -radius; dy <= radius; ++dy) {
      const int y = c.cy + dy;
      if (y < 0 || y >= map.height()) continue;
      for (int dx = -radius; dx <= radius; ++dx) {
        const int x = c.cx + dx;
        if (x < 0 || x >= map.width()) continue;
        const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        double& slot = map.at(c.cls, y, x);
        slot = std::max(slot, g);
      }
    }
    map.at(c.cls, c.cy, c.cx) = 1.0;
  }
  return map;
}

double focal_loss(const Heatmap& pred, const Heatmap& target, const TargetConfig& cfg) {
  if (pred.classes() != target.classes() || pred.height() != target.height() ||
      pred.width() != target.width()) {
    throw ArgumentError("focal_loss prediction and target shapes differ");
  }
  constexpr double kEps = 1e-12;
  const auto p = pred.values();
  const auto t = target.values();
  double pos_loss = 0.0, neg_loss = 0.0;
  std::size_t num_pos = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = std::clamp(p[i], kEps, 1.0 - kEps);
    if (t[i] == 1.0) {
      pos_loss -= std::pow(1.0 - pi, cfg.focal_alpha) * std::log(pi);
      ++num_pos;
    } else {
      neg_loss -= std::pow(1.0 - t[i], cfg.focal_beta) * std::pow(pi, cfg.focal_alpha) *
                  std::log(1.0 - pi);
    }
  }
  if (num_pos == 0) return neg_loss;
  return (pos_loss + neg_loss) / static_cast<double>(num_pos);
}

StereoBox2D encode_stereo_targets(const PixelBox& left, const PixelBox& right,
                                  const TargetConfig& cfg) {
  cfg.validate();
  if (!left.valid() || !right.valid()) {
    throw ArgumentError("stereo boxes must have positive size");
  }
  if (std::abs(left.center_v() - right.center_v()) > kRectificationTolerancePx) {
    throw RectificationError("left/right boxes are not vertically aligned");
  }
  const double r = cfg.downsample;
  const double lu = left.center_u() / r;
  const double lv = left.center_v() / r;
  StereoBox2D sb;
  sb.cx = static_cast<int>(std::floor(lu));
  sb.cy = static_cast<int>(std::floor(lv));
  sb.o_ul = lu - sb.cx;
  sb.o_ur = right.center_u() / r - sb.cx;
  sb.o_v = lv - sb.cy;
  sb.w_l = left.width() / r;
  sb.w_r = right.width() / r;
  sb.h = left.height() / r;
  return sb;
}

StereoBoxPair decode_stereo_targets(const StereoBox2D& sb, const TargetConfig& cfg) {
  cfg.validate();
  if (!(sb.w_l > 0.0 && sb.w_r > 0.0 && sb.h > 0.0)) {
    throw ArgumentError("stereo box sizes must be positive");
  }
  const double r = cfg.downsample;
  const double cv = (sb.cy + sb.o_v) * r;
  const double half_h = 0.5 * sb.h * r;
  const double lu = (sb.cx + sb.o_ul) * r;
  const double ru = (sb.cx + sb.o_ur) * r;
  return {{lu - 0.5 * sb.w_l * r, cv - half_h, lu + 0.5 * sb.w_l * r, cv + half_h},
          {ru - 0.5 * sb.w_r * r, cv - half_h, ru + 0.5 * sb.w_r * r, cv + half_h}};
}

double l1_loss(std::span<const double> pred, std::span<const double> gt) {
  if (pred.empty() || pred.size() != gt.size()) {
    throw ArgumentError("l1_loss needs equal-length, non-empty inputs");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) total += std::abs(pred[k] - gt[k]);
  return total / static_cast<double>(pred.size());
}

double total_loss(const LossParts& p, const LossWeights& w) {
  return w.cls * p.cls + w.off * p.off + w.size * p.size + w.dim * p.dim +
         w.theta * p.theta + w.kpts * p.kpts + w.depth * p.depth;
}

}  // namespace stereo3d
