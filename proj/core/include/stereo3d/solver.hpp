#pragma once

// Post-processing of a detected object: recovery of (x, y, theta) from the
// five projection measurements at fixed depth, and photometric refinement of
// the center depth over the object's visible range.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "stereo3d/geometry.hpp"
#include "stereo3d/image.hpp"

namespace stereo3d {

struct PerspectiveKeypoint {
  double u = 0.0;  // normalized
  CornerType corner_type = kDefaultKeypoint;
};

/// Horizontal extent (normalized u) of the unoccluded object surface.
struct VisibleRange {
  double u_left = 0.0;
  double u_right = 0.0;
  int occlusion_level = 0;

  bool valid() const { return u_left < u_right; }
};

struct GNConfig {
  int max_iters = 50;
  double lambda = 1e-3;      // initial Levenberg damping
  double lambda_max = 1e8;   // give up once damping exceeds this
  double tol = 1e-12;        // parameter update norm
  std::array<double, 5> weights{1.0, 1.0, 1.0, 1.0, 1.0};
  VerticalExtent vertical = VerticalExtent::Height;
  // A stationary point whose residual norm stays above this does not
  // reproduce the measurements: either they are noisy or the solve fell
  // into a local minimum of the yaw landscape.
  double consistency_tol = 1e-9;
  // Extra yaw starts, at +-0.2 rad multiples of init.theta, tried when the
  // first run ends inconsistent. The lowest-cost run wins.
  int yaw_restarts = 4;
};

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// Which residuals take part and whether yaw is held fixed.
struct PoseConstraints {
  std::array<bool, 5> active{true, true, true, true, true};
  std::optional<double> fixed_theta;
};

/// Stationary: a minimum was reached but its residual exceeds
/// GNConfig::consistency_tol. Expected with noisy measurements; on exact ones
/// it marks a local minimum.
enum class SolveStatus : std::uint8_t { Converged, Stationary, MaxIterations, Singular };

struct PoseEstimate {
  Pose2 pose;
  double residual_norm = 0.0;  // weighted, over active residuals
  int iterations = 0;
  SolveStatus status = SolveStatus::MaxIterations;
  /// Residual norm after each accepted step, starting with the initial one.
  std::vector<double> residual_history;

  bool converged() const { return status == SolveStatus::Converged; }
};

/// Damped Gauss-Newton on r_j = predicted_j(x, y, theta; z, dims) - m_j with
/// an analytic Jacobian. Never throws for numerical trouble: failures come
/// back flagged, carrying the best iterate. Throws DomainError /
/// BehindCameraError when z, dims or the initial pose are invalid.
PoseEstimate estimate_box_pose(const Measurements5& m, const BoxDims& dims, double z,
                               const Pose2& init, CornerType keypoint,
                               const GNConfig& cfg = {},
                               const PoseConstraints& constraints = {});

/// Residual vector (predicted - measured) for a pose; exposed for tests.
std::array<double, 5> projection_residuals(const Measurements5& m, const BoxDims& dims,
                                           double z, const Pose2& pose, CornerType keypoint,
                                           VerticalExtent vertical = VerticalExtent::Height);

/// Drops residuals of box edges within `border_px` of the image border and
/// fixes yaw to theta0 (derived from the viewpoint angle) when any edge is
/// clipped.
PoseConstraints truncation_constraints(const PixelBox& left_box, std::size_t image_width,
                                       std::size_t image_height, double theta0,
                                       double border_px = 1.0);

/// Back-projects the left box center at depth z; theta0 from alpha.
Pose2 initial_pose_from_network(const StereoBoxPair& boxes, double z, double alpha,
                                const CameraRig& rig);

struct ShrinkResult {
  VisibleRange range;
  bool degenerate = false;
};

/// Ranges narrower than this (normalized units) count as degenerate.
inline constexpr double kMinVisibleWidth = 1e-9;

/// For occlusion_level >= 2 moves both bounds inward by kappa * width.
/// Throws ArgumentError unless 0 <= kappa < 0.5.
ShrinkResult shrink_visible_range(const VisibleRange& vr, double kappa);

struct AlignSearch {
  double half_window = 2.0;  // meters
  int steps = 81;
};

enum class AlignStatus : std::uint8_t { Refined, Degenerate };

struct AlignResult {
  double z = 0.0;
  AlignStatus status = AlignStatus::Refined;
  std::vector<double> candidates;
  std::vector<double> costs;  // NaN where no pixel sampled inside the image
};

/// Mean absolute left/right intensity difference over the pixels inside the
/// visible range and [v_top, v_bottom] (normalized), evaluated for uniformly
/// spaced depths in [z_init - half_window, z_init + half_window] with the
/// whole patch shifted by the candidate's disparity. The grid minimum is
/// refined by a parabola through the best three samples. Textureless input
/// yields z_init flagged Degenerate. Throws AlignmentError when no candidate
/// samples inside the right image.
AlignResult dense_align(const GrayImage& left, const GrayImage& right,
                        const VisibleRange& vr, double v_top, double v_bottom,
                        double z_init, const AlignSearch& search, const CameraRig& rig);

}  // namespace stereo3d
