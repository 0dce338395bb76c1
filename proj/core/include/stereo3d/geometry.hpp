#pragma once

// Camera model, depth/disparity conversion, depth grids, angle helpers and
// the five-measurement forward projection of an oriented 3D box.
//
// Coordinates follow the rectified left camera: x right, y down, z forward.
// A Box3D yaw of 0 puts its width along +x and its length along +z; a local
// corner offset (a, c) (a along width, c along length) maps to
//
//   X = x + a cos(theta) + c sin(theta)
//   Z = z - a sin(theta) + c cos(theta)

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace stereo3d {

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

class CameraRig {
 public:
  /// Throws ArgumentError unless fu, fv and baseline are positive.
  CameraRig(double fu, double fv, double cu, double cv, double baseline);

  double fu() const { return fu_; }
  double fv() const { return fv_; }
  double cu() const { return cu_; }
  double cv() const { return cv_; }
  double baseline() const { return baseline_; }

  /// fu * b, the depth-disparity product.
  double focal_baseline() const { return fu_ * baseline_; }

  /// Rig in feature-map coordinates for a map sampled at `factor` times the
  /// image resolution (0.25 for stride 4). Image pixel j is centered on u = j;
  /// feature cell k spans [k, k + 1), so u maps to (u + 0.5) * factor.
  /// Disparities scale by `factor`; the baseline is unchanged.
  CameraRig scaled(double factor) const;

  bool operator==(const CameraRig&) const = default;

 private:
  double fu_;
  double fv_;
  double cu_;
  double cv_;
  double baseline_;
};

/// KITTI object benchmark rig (P2 intrinsics, 0.54 m baseline).
CameraRig kitti_like_rig();

struct Box3D {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;
  double w = 1.0;
  double h = 1.0;
  double l = 1.0;
  double theta = 0.0;

  bool valid() const;
  bool operator==(const Box3D&) const = default;
};

struct BoxDims {
  double w = 1.0;
  double h = 1.0;
  double l = 1.0;
};

/// Pixel rectangle, (u1, v1) top-left and (u2, v2) bottom-right.
struct PixelBox {
  double u1 = 0.0;
  double v1 = 0.0;
  double u2 = 0.0;
  double v2 = 0.0;

  double width() const { return u2 - u1; }
  double height() const { return v2 - v1; }
  double center_u() const { return 0.5 * (u1 + u2); }
  double center_v() const { return 0.5 * (v1 + v2); }
  bool valid() const { return u1 < u2 && v1 < v2; }
  bool operator==(const PixelBox&) const = default;
};

/// Left/right 2D boxes of one object in a rectified pair.
struct StereoBoxPair {
  PixelBox left;
  PixelBox right;
};

class DepthGrid {
 public:
  double z_min() const { return levels_.front(); }
  double z_max() const { return levels_.back(); }
  std::size_t size() const { return levels_.size(); }
  double step() const { return levels_[1] - levels_[0]; }
  double operator[](std::size_t i) const { return levels_[i]; }
  std::span<const double> levels() const { return levels_; }

  /// Index of the level closest in depth to z (ties go to the lower level).
  std::size_t nearest_level(double z) const;

 private:
  friend DepthGrid uniform_depth_grid(double z_min, double z_max, std::size_t n);
  explicit DepthGrid(std::vector<double> levels) : levels_(std::move(levels)) {}

  std::vector<double> levels_;
};

/// n depths, inclusive endpoints, n - 1 equal gaps.
DepthGrid uniform_depth_grid(double z_min, double z_max, std::size_t n);

/// Depths of n levels spaced uniformly in disparity over [d_min, d_max],
/// returned in increasing depth order. Used to contrast against
/// uniform_depth_grid.
std::vector<double> disparity_uniform_depths(double d_min, double d_max,
                                             std::size_t n,
                                             const CameraRig& rig);

double depth_from_disparity(double disparity, const CameraRig& rig);
double disparity_from_depth(double depth, const CameraRig& rig);

struct DepthRangeOptions {
  double rho = 0.3;
  double z_floor = 1.0;
};

/// Depth search interval around the depth implied by the horizontal gap
/// between the left and right box centers.
std::pair<double, double> depth_range_from_box_pair(
    const StereoBoxPair& boxes, const CameraRig& rig,
    const DepthRangeOptions& options = {});

/// theta = wrap(alpha + atan(x / z)).
double egocentric_from_allocentric(double alpha, double x, double z);
/// alpha = wrap(theta - atan(x / z)).
double allocentric_from_egocentric(double theta, double x, double z);

struct AngleCode {
  double sin_a = 0.0;
  double cos_a = 1.0;
};

AngleCode encode_angle(double alpha);
/// Normalizes (sin_a, cos_a) before decoding; result in (-pi, pi].
double decode_angle(double sin_a, double cos_a);
inline double decode_angle(const AngleCode& code) {
  return decode_angle(code.sin_a, code.cos_a);
}

/// Bottom corners, named by local offset sign: right = +w/2, front = +l/2.
enum class CornerType : std::uint8_t { FrontLeft, FrontRight, BackLeft, BackRight };

/// Local (a, c) half-extent signs for a corner.
std::pair<double, double> corner_signs(CornerType corner);
std::string_view to_string(CornerType corner);
CornerType corner_from_string(std::string_view text);

/// The edge-corner layout used for u_l/u_r puts the perspective keypoint on
/// the back-right corner by default.
inline constexpr CornerType kDefaultKeypoint = CornerType::BackRight;

/// Which half-extent enters the vertical (v_t, v_b) equations. Height is the
/// physical reading; LengthLiteral puts l/2 in place of h/2 there.
enum class VerticalExtent : std::uint8_t { Height, LengthLiteral };

/// Box edges and perspective keypoint in normalized camera coordinates:
/// ((u - cu) / fu, (v - cv) / fv).
struct Measurements5 {
  double u_l = 0.0;
  double v_t = 0.0;
  double u_r = 0.0;
  double v_b = 0.0;
  double u_p = 0.0;

  std::array<double, 5> as_array() const { return {u_l, v_t, u_r, v_b, u_p}; }
  bool valid() const { return u_l < u_r && v_t < v_b; }

  /// Throws ArgumentError if the resulting box is empty.
  static Measurements5 from_pixels(const PixelBox& left_box, double keypoint_u,
                                   const CameraRig& rig);
  PixelBox to_pixel_box(const CameraRig& rig) const;
};

double normalize_u(double u_px, const CameraRig& rig);
double normalize_v(double v_px, const CameraRig& rig);
double pixel_u(double u_norm, const CameraRig& rig);
double pixel_v(double v_norm, const CameraRig& rig);

/// Evaluates the five projection ratios. Throws BehindCameraError if any
/// denominator is <= 0.
Measurements5 project_box(const Box3D& box, CornerType keypoint = kDefaultKeypoint,
                          VerticalExtent vertical = VerticalExtent::Height);

/// Camera-frame (X, Z) of a bottom corner.
std::pair<double, double> corner_xz(const Box3D& box, CornerType corner);

/// Image coordinate u (pixel centers on integers) to feature coordinate.
inline double to_feature_coord(double u_px, double factor) { return (u_px + 0.5) * factor; }

/// Pixel projection of a camera-frame point.
std::pair<double, double> project_point(double x, double y, double z,
                                        const CameraRig& rig);

}  // namespace stereo3d
