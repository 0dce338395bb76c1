#include "stereo3d/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stereo3d/errors.hpp"

namespace stereo3d {

double wrap_angle(double angle) {
  double r = std::remainder(angle, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

CameraRig::CameraRig(double fu, double fv, double cu, double cv, double baseline)
    : fu_(fu), fv_(fv), cu_(cu), cv_(cv), baseline_(baseline) {
  if (!(fu > 0.0) || !(fv > 0.0) || !(baseline > 0.0)) {
    throw ArgumentError("CameraRig requires fu > 0, fv > 0 and baseline > 0");
  }
}

CameraRig CameraRig::scaled(double factor) const {
  if (!(factor > 0.0)) throw ArgumentError("rig scale factor must be positive");
  // Image pixel j is centered on u = j; feature cell k spans [k, k + 1).
  return CameraRig(fu_ * factor, fv_ * factor, (cu_ + 0.5) * factor,
                   (cv_ + 0.5) * factor, baseline_);
}

CameraRig kitti_like_rig() {
  return CameraRig(721.5377, 721.5377, 609.5593, 172.854, 0.54);
}

bool Box3D::valid() const {
  return w > 0.0 && h > 0.0 && l > 0.0 && z > 0.0 && theta > -kPi && theta <= kPi;
}

std::size_t DepthGrid::nearest_level(double z) const {
  auto it = std::lower_bound(levels_.begin(), levels_.end(), z);
  if (it == levels_.begin()) return 0;
  if (it == levels_.end()) return levels_.size() - 1;
  const auto hi = static_cast<std::size_t>(it - levels_.begin());
  return (z - levels_[hi - 1] <= levels_[hi] - z) ? hi - 1 : hi;
}

DepthGrid uniform_depth_grid(double z_min, double z_max, std::size_t n) {
  if (!(z_min > 0.0) || !(z_max > z_min) || n < 2) {
    throw ArgumentError("uniform_depth_grid requires 0 < z_min < z_max and n >= 2");
  }
  std::vector<double> levels(n);
  const double span = z_max - z_min;
  const double gaps = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    levels[i] = z_min + span * (static_cast<double>(i) / gaps);
  }
  levels.back() = z_max;
  return DepthGrid(std::move(levels));
}

std::vector<double> disparity_uniform_depths(double d_min, double d_max,
                                             std::size_t n,
                                             const CameraRig& rig) {
  if (!(d_min > 0.0) || !(d_max > d_min) || n < 2) {
    throw ArgumentError("disparity grid requires 0 < d_min < d_max and n >= 2");
  }
  std::vector<double> depths(n);
  const double step = (d_max - d_min) / static_cast<double>(n - 1);
  // Largest disparity first so depths come out increasing.
  for (std::size_t i = 0; i < n; ++i) {
    depths[i] = depth_from_disparity(d_max - step * static_cast<double>(i), rig);
  }
  return depths;
}

double depth_from_disparity(double disparity, const CameraRig& rig) {
  if (!(disparity > 0.0)) {
    throw DomainError("disparity must be positive, got " + std::to_string(disparity));
  }
  return rig.focal_baseline() / disparity;
}

double disparity_from_depth(double depth, const CameraRig& rig) {
  if (!(depth > 0.0)) {
    throw DomainError("depth must be positive, got " + std::to_string(depth));
  }
  return rig.focal_baseline() / depth;
}

std::pair<double, double> depth_range_from_box_pair(const StereoBoxPair& boxes,
                                                    const CameraRig& rig,
                                                    const DepthRangeOptions& options) {
  if (!(options.rho >= 0.0)) throw ArgumentError("depth margin rho must be >= 0");
  const double gap = boxes.left.center_u() - boxes.right.center_u();
  if (!(gap > 0.0)) {
    throw DegenerateStereoError("left/right box centers give non-positive disparity " +
                                std::to_string(gap));
  }
  const double z_c = rig.focal_baseline() / gap;
  return {std::max(options.z_floor, z_c * (1.0 - options.rho)),
          std::max(options.z_floor, z_c * (1.0 + options.rho))};
}

double egocentric_from_allocentric(double alpha, double x, double z) {
  if (!(z > 0.0)) throw DomainError("egocentric angle requires z > 0");
  return wrap_angle(alpha + std::atan(x / z));
}

double allocentric_from_egocentric(double theta, double x, double z) {
  if (!(z > 0.0)) throw DomainError("allocentric angle requires z > 0");
  return wrap_angle(theta - std::atan(x / z));
}

AngleCode encode_angle(double alpha) { return {std::sin(alpha), std::cos(alpha)}; }

double decode_angle(double sin_a, double cos_a) {
  const double norm = std::hypot(sin_a, cos_a);
  if (!(norm > 0.0)) throw DegenerateAngleError("cannot decode angle from zero vector");
  return wrap_angle(std::atan2(sin_a / norm, cos_a / norm));
}

std::pair<double, double> corner_signs(CornerType corner) {
  switch (corner) {
    case CornerType::FrontLeft:
      return {-1.0, 1.0};
    case CornerType::FrontRight:
      return {1.0, 1.0};
    case CornerType::BackLeft:
      return {-1.0, -1.0};
    case CornerType::BackRight:
      return {1.0, -1.0};
  }
  return {1.0, -1.0};
}

std::string_view to_string(CornerType corner) {
  switch (corner) {
    case CornerType::FrontLeft:
      return "FL";
    case CornerType::FrontRight:
      return "FR";
    case CornerType::BackLeft:
      return "BL";
    case CornerType::BackRight:
      return "BR";
  }
  return "BR";
}

CornerType corner_from_string(std::string_view text) {
  if (text == "FL") return CornerType::FrontLeft;
  if (text == "FR") return CornerType::FrontRight;
  if (text == "BL") return CornerType::BackLeft;
  if (text == "BR") return CornerType::BackRight;
  throw ArgumentError("unknown corner type '" + std::string(text) + "'");
}

double normalize_u(double u_px, const CameraRig& rig) { return (u_px - rig.cu()) / rig.fu(); }
double normalize_v(double v_px, const CameraRig& rig) { return (v_px - rig.cv()) / rig.fv(); }
double pixel_u(double u_norm, const CameraRig& rig) { return rig.cu() + rig.fu() * u_norm; }
double pixel_v(double v_norm, const CameraRig& rig) { return rig.cv() + rig.fv() * v_norm; }

Measurements5 Measurements5::from_pixels(const PixelBox& left_box, double keypoint_u,
                                         const CameraRig& rig) {
  if (!left_box.valid()) throw ArgumentError("left box must have positive extent");
  return {normalize_u(left_box.u1, rig), normalize_v(left_box.v1, rig),
          normalize_u(left_box.u2, rig), normalize_v(left_box.v2, rig),
          normalize_u(keypoint_u, rig)};
}

PixelBox Measurements5::to_pixel_box(const CameraRig& rig) const {
  return {pixel_u(u_l, rig), pixel_v(v_t, rig), pixel_u(u_r, rig), pixel_v(v_b, rig)};
}

std::pair<double, double> corner_xz(const Box3D& box, CornerType corner) {
  const auto [sa, sc] = corner_signs(corner);
  const double a = sa * 0.5 * box.w;
  const double c = sc * 0.5 * box.l;
  const double s = std::sin(box.theta);
  const double co = std::cos(box.theta);
  return {box.x + a * co + c * s, box.z - a * s + c * co};
}

Measurements5 project_box(const Box3D& box, CornerType keypoint, VerticalExtent vertical) {
  const auto [xl, zl] = corner_xz(box, CornerType::BackLeft);
  const auto [xr, zr] = corner_xz(box, CornerType::FrontRight);
  const auto [xp, zp] = corner_xz(box, keypoint);
  if (!(zl > 0.0) || !(zr > 0.0) || !(zp > 0.0)) {
    throw BehindCameraError("box corner projects on or behind the camera plane");
  }
  const double half = 0.5 * (vertical == VerticalExtent::Height ? box.h : box.l);
  return {xl / zl, (box.y - half) / zl, xr / zr, (box.y + half) / zr, xp / zp};
}

std::pair<double, double> project_point(double x, double y, double z,
                                        const CameraRig& rig) {
  if (!(z > 0.0)) throw BehindCameraError("point projects behind the camera");
  return {rig.cu() + rig.fu() * x / z, rig.cv() + rig.fv() * y / z};
}

}  // namespace stereo3d
