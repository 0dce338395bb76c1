#pragma once

// Rotated bird's-eye-view and 3D IoU, and KITTI-style average precision over
// difficulty buckets.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stereo3d/geometry.hpp"
#include "stereo3d/kitti.hpp"

namespace stereo3d {

/// Oriented rectangle in the x-z ground plane. Same yaw convention as Box3D.
struct BevBox {
  double x = 0.0;
  double z = 0.0;
  double w = 1.0;
  double l = 1.0;
  double theta = 0.0;

  bool valid() const { return w > 0.0 && l > 0.0; }
  bool operator==(const BevBox&) const = default;
};

BevBox bev_from_box(const Box3D& box);

struct Point2 {
  double x = 0.0;
  double z = 0.0;
};

/// Corners in counter-clockwise order (positive shoelace area in x-z).
std::array<Point2, 4> bev_corners(const BevBox& box);

/// Shoelace area of a simple polygon, signed by orientation.
double polygon_area(const std::vector<Point2>& poly);

/// Intersection polygon of two convex counter-clockwise polygons.
std::vector<Point2> clip_convex(const std::vector<Point2>& subject,
                                const std::vector<Point2>& clip);

/// Intersection area below this counts as empty.
inline constexpr double kAreaEpsilon = 1e-12;

double bev_intersection_area(const BevBox& a, const BevBox& b);
/// Exactly symmetric: the pair is put in a canonical order before clipping.
/// Throws ArgumentError for non-positive extents.
double bev_iou(const BevBox& a, const BevBox& b);
double iou3d(const Box3D& a, const Box3D& b);

using RecordIou = std::function<double(const ObjectRecord&, const ObjectRecord&)>;

double record_bev_iou(const ObjectRecord& det, const ObjectRecord& gt);
double record_iou3d(const ObjectRecord& det, const ObjectRecord& gt);

enum class ApMode : std::uint8_t { Eleven, Forty };

struct FrameRecords {
  std::vector<ObjectRecord> gt;
  std::vector<ObjectRecord> det;
};

struct ApConfig {
  std::string cls = "Car";
  double iou_threshold = 0.7;
  Difficulty difficulty = Difficulty::Moderate;
  ApMode mode = ApMode::Eleven;
  DifficultyThresholds thresholds;
};

struct PRPoint {
  double recall = 0.0;
  double precision = 0.0;
  double score = 0.0;
};

struct APResult {
  /// False when no ground truth falls into the bucket; ap is then meaningless.
  bool applicable = false;
  double ap = 0.0;
  std::size_t num_gt = 0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::vector<PRPoint> curve;  // one point per counted detection
};

/// Greedy per-frame matching, highest score first (ties keep input order).
/// A detection takes the unmatched in-bucket GT of highest IoU >= threshold.
/// Otherwise it is ignored if it overlaps a same-class GT outside the bucket
/// or its box is shorter than the bucket's minimum height, and counts as a
/// false positive if not. Detections without a score rank as score 0.
APResult average_precision(const std::vector<FrameRecords>& frames, const RecordIou& iou,
                           const ApConfig& cfg);

/// Interpolated precision averaged over the mode's recall thresholds.
double interpolated_ap(const std::vector<PRPoint>& curve, ApMode mode);

struct ApRow {
  std::string metric;  // "bev" or "3d"
  std::string cls;
  Difficulty difficulty = Difficulty::Moderate;
  double iou_threshold = 0.0;
  APResult result;
};

/// Both metrics, every bucket, every threshold.
std::vector<ApRow> evaluate_all(const std::vector<FrameRecords>& frames, const std::string& cls,
                                ApMode mode, const std::vector<double>& iou_thresholds = {0.5, 0.7},
                                const DifficultyThresholds& thresholds = {});

/// Tab-separated table with a header row; AP in percent with two decimals,
/// "n/a" when not applicable.
std::string format_results_table(const std::vector<ApRow>& rows);

}  // namespace stereo3d
