#include "stereo3d/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "stereo3d/errors.hpp"

namespace stereo3d {
namespace {

struct Evaluation {
  Eigen::VectorXd residuals;  // weighted, active rows only
  Eigen::MatrixXd jacobian;   // d residual / d free params
  bool valid = false;
};

// One projection ratio and its partials w.r.t. (x, y, theta).
struct Ratio {
  double value;
  double dx;
  double dy;
  double dtheta;
};

Ratio horizontal_ratio(const Pose2& p, double z, const BoxDims& d, CornerType corner) {
  const auto [sa, sc] = corner_signs(corner);
  const double a = sa * 0.5 * d.w;
  const double c = sc * 0.5 * d.l;
  const double s = std::sin(p.theta), co = std::cos(p.theta);
  const double num = p.x + a * co + c * s;
  const double den = z - a * s + c * co;
  const double dnum = -a * s + c * co;
  const double dden = -a * co - c * s;
  return {num / den, 1.0 / den, 0.0, (dnum * den - num * dden) / (den * den)};
}

Ratio vertical_ratio(const Pose2& p, double z, const BoxDims& d, CornerType corner,
                     double offset) {
  const auto [sa, sc] = corner_signs(corner);
  const double a = sa * 0.5 * d.w;
  const double c = sc * 0.5 * d.l;
  const double s = std::sin(p.theta), co = std::cos(p.theta);
  const double num = p.y + offset;
  const double den = z - a * s + c * co;
  const double dden = -a * co - c * s;
  return {num / den, 0.0, 1.0 / den, -num * dden / (den * den)};
}

std::array<Ratio, 5> predict(const Pose2& p, double z, const BoxDims& d, CornerType keypoint,
                             VerticalExtent vertical) {
  const double half = 0.5 * (vertical == VerticalExtent::Height ? d.h : d.l);
  return {horizontal_ratio(p, z, d, CornerType::BackLeft),
          vertical_ratio(p, z, d, CornerType::BackLeft, -half),
          horizontal_ratio(p, z, d, CornerType::FrontRight),
          vertical_ratio(p, z, d, CornerType::FrontRight, half),
          horizontal_ratio(p, z, d, keypoint)};
}

bool denominators_positive(const Pose2& p, double z, const BoxDims& d, CornerType keypoint) {
  const Box3D box{p.x, p.y, z, d.w, d.h, d.l, p.theta};
  for (CornerType c : {CornerType::BackLeft, CornerType::FrontRight, keypoint}) {
    if (!(corner_xz(box, c).second > 0.0)) return false;
  }
  return true;
}

}  // namespace

std::array<double, 5> projection_residuals(const Measurements5& m, const BoxDims& dims,
                                           double z, const Pose2& pose, CornerType keypoint,
                                           VerticalExtent vertical) {
  const auto pred = predict(pose, z, dims, keypoint, vertical);
  const auto meas = m.as_array();
  std::array<double, 5> r{};
  for (std::size_t j = 0; j < 5; ++j) r[j] = pred[j].value - meas[j];
  return r;
}

PoseEstimate estimate_box_pose(const Measurements5& m, const BoxDims& dims, double z,
                               const Pose2& init, CornerType keypoint, const GNConfig& cfg,
                               const PoseConstraints& constraints) {
  if (!(z > 0.0)) throw DomainError("estimate_box_pose requires z > 0");
  if (!(dims.w > 0.0 && dims.h > 0.0 && dims.l > 0.0)) {
    throw DomainError("estimate_box_pose requires positive dimensions");
  }
  if (cfg.max_iters < 1 || !(cfg.tol > 0.0) || cfg.yaw_restarts < 0 ||
      !(cfg.consistency_tol >= 0.0)) {
    throw ArgumentError(
        "GNConfig requires max_iters >= 1, tol > 0, yaw_restarts >= 0, consistency_tol >= 0");
  }
  Pose2 start = init;
  if (constraints.fixed_theta) start.theta = *constraints.fixed_theta;
  if (!denominators_positive(start, z, dims, keypoint)) {
    throw BehindCameraError("initial pose places a box corner behind the camera");
  }

  const bool solve_theta = !constraints.fixed_theta.has_value();
  const Eigen::Index n_params = solve_theta ? 3 : 2;
  std::vector<std::size_t> rows;
  for (std::size_t j = 0; j < 5; ++j) {
    if (constraints.active[j]) rows.push_back(j);
  }
  const auto meas = m.as_array();

  auto evaluate = [&](const Pose2& p, bool with_jacobian) {
    Evaluation ev;
    if (!denominators_positive(p, z, dims, keypoint)) return ev;
    const auto pred = predict(p, z, dims, keypoint, cfg.vertical);
    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    ev.residuals.resize(n_rows);
    if (with_jacobian) ev.jacobian.resize(n_rows, n_params);
    for (Eigen::Index k = 0; k < n_rows; ++k) {
      const std::size_t j = rows[static_cast<std::size_t>(k)];
      const double sw = std::sqrt(cfg.weights[j]);
      ev.residuals(k) = sw * (pred[j].value - meas[j]);
      if (with_jacobian) {
        ev.jacobian(k, 0) = sw * pred[j].dx;
        ev.jacobian(k, 1) = sw * pred[j].dy;
        if (solve_theta) ev.jacobian(k, 2) = sw * pred[j].dtheta;
      }
    }
    ev.valid = ev.residuals.allFinite();
    return ev;
  };

  auto run = [&](const Pose2& from) {
    PoseEstimate result;
    result.pose = from;
    result.pose.theta = wrap_angle(from.theta);
    Evaluation current = evaluate(from, true);
    double cost = current.residuals.squaredNorm();
    result.residual_history.push_back(std::sqrt(cost));
    result.residual_norm = std::sqrt(cost);
    if (cost == 0.0) {
      result.status = SolveStatus::Converged;
      return result;
    }

    Pose2 pose = from;
    double lambda = cfg.lambda;
    result.status = SolveStatus::MaxIterations;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
      result.iterations = iter + 1;
      const Eigen::MatrixXd normal = current.jacobian.transpose() * current.jacobian;
      const Eigen::VectorXd gradient = current.jacobian.transpose() * current.residuals;
      bool accepted = false;
      bool done = false;
      while (!accepted) {
        Eigen::MatrixXd damped = normal;
        for (Eigen::Index i = 0; i < n_params; ++i) {
          damped(i, i) += lambda * std::max(normal(i, i), 1e-12);
        }
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
        const Eigen::VectorXd step = ldlt.solve(-gradient);
        if (ldlt.info() != Eigen::Success || !step.allFinite() || !ldlt.isPositive()) {
          lambda *= 10.0;
          if (lambda > cfg.lambda_max) {
            result.status = SolveStatus::Singular;
            done = true;
            break;
          }
          continue;
        }
        if (step.norm() < cfg.tol) {
          result.status = SolveStatus::Converged;
          done = true;
          break;
        }
        Pose2 trial = pose;
        trial.x += step(0);
        trial.y += step(1);
        if (solve_theta) trial.theta += step(2);
        Evaluation next = evaluate(trial, true);
        const double next_cost = next.valid ? next.residuals.squaredNorm()
                                            : std::numeric_limits<double>::infinity();
        if (next_cost < cost) {
          pose = trial;
          current = std::move(next);
          cost = next_cost;
          lambda = std::max(lambda / 10.0, 1e-15);
          accepted = true;
          result.residual_history.push_back(std::sqrt(cost));
          if (step.norm() < cfg.tol || cost == 0.0) {
            result.status = SolveStatus::Converged;
            done = true;
          }
        } else {
          lambda *= 10.0;
          if (lambda > cfg.lambda_max) {
            // No descent left at any damping: a stationary point unless the
            // gradient says otherwise.
            result.status = gradient.norm() < 1e-10 ? SolveStatus::Converged
                                                    : SolveStatus::Singular;
            done = true;
            break;
          }
        }
      }
      if (done) break;
    }
    result.pose = {pose.x, pose.y, wrap_angle(pose.theta)};
    result.residual_norm = std::sqrt(cost);
    return result;
  };

  PoseEstimate best = run(start);
  auto inconsistent = [&](const PoseEstimate& e) {
    return e.status == SolveStatus::Converged && e.residual_norm > cfg.consistency_tol;
  };
  if (solve_theta && inconsistent(best)) {
    for (int k = 0; k < cfg.yaw_restarts; ++k) {
      const double offset = 0.2 * (k / 2 + 1) * (k % 2 == 0 ? 1.0 : -1.0);
      Pose2 alt = start;
      alt.theta += offset;
      if (!denominators_positive(alt, z, dims, keypoint)) continue;
      PoseEstimate e = run(alt);
      if (e.status == SolveStatus::Converged && e.residual_norm < best.residual_norm) {
        best = std::move(e);
        if (!inconsistent(best)) break;
      }
    }
  }
  if (inconsistent(best)) best.status = SolveStatus::Stationary;
  return best;
}

PoseConstraints truncation_constraints(const PixelBox& left_box, std::size_t image_width,
                                       std::size_t image_height, double theta0,
                                       double border_px) {
  PoseConstraints c;
  const double max_u = static_cast<double>(image_width) - 1.0 - border_px;
  const double max_v = static_cast<double>(image_height) - 1.0 - border_px;
  c.active[0] = left_box.u1 > border_px;
  c.active[1] = left_box.v1 > border_px;
  c.active[2] = left_box.u2 < max_u;
  c.active[3] = left_box.v2 < max_v;
  const bool clipped = !(c.active[0] && c.active[1] && c.active[2] && c.active[3]);
  if (clipped) c.fixed_theta = wrap_angle(theta0);
  return c;
}

Pose2 initial_pose_from_network(const StereoBoxPair& boxes, double z, double alpha,
                                const CameraRig& rig) {
  if (!(z > 0.0)) throw DomainError("initial pose requires z > 0");
  const double x0 = z * (boxes.left.center_u() - rig.cu()) / rig.fu();
  const double y0 = z * (boxes.left.center_v() - rig.cv()) / rig.fv();
  return {x0, y0, egocentric_from_allocentric(alpha, x0, z)};
}

ShrinkResult shrink_visible_range(const VisibleRange& vr, double kappa) {
  if (!(kappa >= 0.0 && kappa < 0.5)) {
    throw ArgumentError("shrink fraction kappa must be in [0, 0.5)");
  }
  if (vr.occlusion_level < 2) return {vr, false};
  const double width = vr.u_right - vr.u_left;
  VisibleRange out = vr;
  out.u_left = vr.u_left + kappa * width;
  out.u_right = vr.u_right - kappa * width;
  if (!(out.u_right - out.u_left > kMinVisibleWidth)) {
    const double center = 0.5 * (vr.u_left + vr.u_right);
    out.u_left = center;
    out.u_right = center;
    return {out, true};
  }
  return {out, false};
}

AlignResult dense_align(const GrayImage& left, const GrayImage& right, const VisibleRange& vr,
                        double v_top, double v_bottom, double z_init,
                        const AlignSearch& search, const CameraRig& rig) {
  if (!vr.valid()) throw ArgumentError("dense_align needs a non-empty visible range");
  if (!(v_top < v_bottom)) throw ArgumentError("dense_align needs v_top < v_bottom");
  if (!(search.half_window > 0.0) || search.steps < 3) {
    throw ArgumentError("dense_align needs half_window > 0 and at least 3 steps");
  }
  const double z_lo = z_init - search.half_window;
  const double z_hi = z_init + search.half_window;
  if (!(z_lo > 0.0)) throw ArgumentError("dense_align search window reaches z <= 0");
  if (left.empty() || right.empty()) throw ArgumentError("dense_align needs images");

  const double u_first = std::max(0.0, std::ceil(pixel_u(vr.u_left, rig)));
  const double u_last =
      std::min(static_cast<double>(left.width()) - 1.0, std::floor(pixel_u(vr.u_right, rig)));
  const double v_first = std::max(0.0, std::ceil(pixel_v(v_top, rig)));
  const double v_last =
      std::min(static_cast<double>(left.height()) - 1.0, std::floor(pixel_v(v_bottom, rig)));

  AlignResult result;
  const auto n = static_cast<std::size_t>(search.steps);
  result.candidates.resize(n);
  result.costs.assign(n, std::numeric_limits<double>::quiet_NaN());
  const double step = (z_hi - z_lo) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double z = z_lo + step * static_cast<double>(k);
    result.candidates[k] = z;
    const double d = disparity_from_depth(z, rig);
    double total = 0.0;
    std::size_t count = 0;
    for (double v = v_first; v <= v_last; v += 1.0) {
      const auto row = static_cast<std::size_t>(v);
      for (double u = u_first; u <= u_last; u += 1.0) {
        const auto sample = right.sample(u - d, v);
        if (!sample) continue;
        total += std::abs(left.at(row, static_cast<std::size_t>(u)) - *sample);
        ++count;
      }
    }
    if (count > 0) result.costs[k] = total / static_cast<double>(count);
  }

  std::size_t best = n;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double c = result.costs[k];
    if (std::isnan(c)) continue;
    if (c < lo) {
      lo = c;
      best = k;
    }
    hi = std::max(hi, c);
  }
  if (best == n) throw AlignmentError("no alignment candidate samples inside the right image");
  if (hi - lo <= 1e-12) {
    result.z = z_init;
    result.status = AlignStatus::Degenerate;
    return result;
  }

  result.z = result.candidates[best];
  const std::size_t mid = std::clamp<std::size_t>(best, 1, n - 2);
  const double c0 = result.costs[mid - 1], c1 = result.costs[mid], c2 = result.costs[mid + 1];
  const double curvature = c0 - 2.0 * c1 + c2;
  if (std::isfinite(c0) && std::isfinite(c1) && std::isfinite(c2) && curvature > 0.0) {
    const double offset = 0.5 * (c0 - c2) / curvature;
    result.z = std::clamp(result.candidates[mid] + offset * step, z_lo, z_hi);
  }
  return result;
}

}  // namespace stereo3d
