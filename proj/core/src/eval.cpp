#include "stereo3d/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <tuple>

#include "stereo3d/errors.hpp"

namespace stereo3d {
namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.z - o.z) - (a.z - o.z) * (b.x - o.x);
}

Point2 line_intersection(const Point2& p1, const Point2& p2, const Point2& q1,
                         const Point2& q2) {
  const double dx = p2.x - p1.x;
  const double dz = p2.z - p1.z;
  const double ex = q2.x - q1.x;
  const double ez = q2.z - q1.z;
  const double denom = dx * ez - dz * ex;
  if (denom == 0.0) return p1;
  const double t = ((q1.x - p1.x) * ez - (q1.z - p1.z) * ex) / denom;
  return {p1.x + t * dx, p1.z + t * dz};
}

auto box_key(const BevBox& b) { return std::tie(b.x, b.z, b.w, b.l, b.theta); }

}  // namespace

BevBox bev_from_box(const Box3D& box) { return {box.x, box.z, box.w, box.l, box.theta}; }

std::array<Point2, 4> bev_corners(const BevBox& box) {
  const double c = std::cos(box.theta);
  const double s = std::sin(box.theta);
  const double hw = 0.5 * box.w;
  const double hl = 0.5 * box.l;
  auto corner = [&](double a, double b) {
    return Point2{box.x + a * c + b * s, box.z - a * s + b * c};
  };
  std::array<Point2, 4> pts{corner(hw, -hl), corner(hw, hl), corner(-hw, hl), corner(-hw, -hl)};
  std::vector<Point2> tmp(pts.begin(), pts.end());
  if (polygon_area(tmp) < 0.0) std::reverse(pts.begin(), pts.end());
  return pts;
}

double polygon_area(const std::vector<Point2>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    twice += p.x * q.z - q.x * p.z;
  }
  return 0.5 * twice;
}

std::vector<Point2> clip_convex(const std::vector<Point2>& subject,
                                const std::vector<Point2>& clip) {
  std::vector<Point2> out = subject;
  for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
    const Point2& a = clip[i];
    const Point2& b = clip[(i + 1) % clip.size()];
    std::vector<Point2> in = std::move(out);
    out.clear();
    for (std::size_t j = 0; j < in.size(); ++j) {
      const Point2& cur = in[j];
      const Point2& prev = in[(j + in.size() - 1) % in.size()];
      const bool cur_in = cross(a, b, cur) >= 0.0;
      const bool prev_in = cross(a, b, prev) >= 0.0;
      if (cur_in) {
        if (!prev_in) out.push_back(line_intersection(prev, cur, a, b));
        out.push_back(cur);
      } else if (prev_in) {
        out.push_back(line_intersection(prev, cur, a, b));
      }
    }
  }
  return out;
}

double bev_intersection_area(const BevBox& a, const BevBox& b) {
  const auto ca = bev_corners(a);
  const auto cb = bev_corners(b);
  const std::vector<Point2> pa(ca.begin(), ca.end());
  const std::vector<Point2> pb(cb.begin(), cb.end());
  const double area = polygon_area(clip_convex(pa, pb));
  return area < kAreaEpsilon ? 0.0 : area;
}

double bev_iou(const BevBox& a, const BevBox& b) {
  if (!a.valid() || !b.valid()) throw ArgumentError("BEV boxes need positive extents");
  const bool swap = box_key(b) < box_key(a);
  const BevBox& first = swap ? b : a;
  const BevBox& second = swap ? a : b;
  const double inter = bev_intersection_area(first, second);
  const double uni = first.w * first.l + second.w * second.l - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou3d(const Box3D& a, const Box3D& b) {
  if (!a.valid() || !b.valid()) throw ArgumentError("3D boxes need positive extents");
  const BevBox ba = bev_from_box(a);
  const BevBox bb = bev_from_box(b);
  const bool swap = box_key(bb) < box_key(ba);
  const double bev_inter = swap ? bev_intersection_area(bb, ba) : bev_intersection_area(ba, bb);
  const double top = std::max(a.y - 0.5 * a.h, b.y - 0.5 * b.h);
  const double bottom = std::min(a.y + 0.5 * a.h, b.y + 0.5 * b.h);
  const double inter = bev_inter * std::max(0.0, bottom - top);
  const double uni = a.w * a.h * a.l + b.w * b.h * b.l - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double record_bev_iou(const ObjectRecord& det, const ObjectRecord& gt) {
  return bev_iou(bev_from_box(box_from_record(det)), bev_from_box(box_from_record(gt)));
}

double record_iou3d(const ObjectRecord& det, const ObjectRecord& gt) {
  return iou3d(box_from_record(det), box_from_record(gt));
}

double interpolated_ap(const std::vector<PRPoint>& curve, ApMode mode) {
  std::vector<double> thresholds;
  if (mode == ApMode::Eleven) {
    for (int k = 0; k <= 10; ++k) thresholds.push_back(k / 10.0);
  } else {
    for (int k = 1; k <= 40; ++k) thresholds.push_back(k / 40.0);
  }
  // Precision envelope from the right: env[i] = max precision at index >= i.
  std::vector<double> envelope(curve.size());
  double running = 0.0;
  for (std::size_t i = curve.size(); i-- > 0;) {
    running = std::max(running, curve[i].precision);
    envelope[i] = running;
  }
  constexpr double kRecallEps = 1e-12;
  double total = 0.0;
  for (double t : thresholds) {
    // Recall is non-decreasing, so the first point reaching t carries the
    // envelope value for all points at or beyond it.
    const auto it = std::find_if(curve.begin(), curve.end(), [&](const PRPoint& p) {
      return p.recall >= t - kRecallEps;
    });
    if (it != curve.end()) total += envelope[static_cast<std::size_t>(it - curve.begin())];
  }
  return total / static_cast<double>(thresholds.size());
}

APResult average_precision(const std::vector<FrameRecords>& frames, const RecordIou& iou,
                           const ApConfig& cfg) {
  if (cfg.difficulty == Difficulty::Ignored) {
    throw ArgumentError("AP needs an easy, moderate or hard bucket");
  }
  const double min_height = cfg.thresholds.min_height[static_cast<std::size_t>(cfg.difficulty)];

  struct Scored {
    double score;
    bool tp;
  };
  std::vector<Scored> scored;
  APResult result;

  for (const FrameRecords& frame : frames) {
    std::vector<int> gt_state(frame.gt.size(), 0);  // 0 unused, 1 in-bucket, 2 ignored
    for (std::size_t g = 0; g < frame.gt.size(); ++g) {
      const ObjectRecord& gt = frame.gt[g];
      if (gt.type != cfg.cls) continue;
      if (meets_difficulty(gt, cfg.difficulty, cfg.thresholds)) {
        gt_state[g] = 1;
        ++result.num_gt;
      } else {
        gt_state[g] = 2;
      }
    }

    std::vector<std::size_t> order;
    for (std::size_t d = 0; d < frame.det.size(); ++d) {
      if (frame.det[d].type == cfg.cls) order.push_back(d);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return frame.det[a].score.value_or(0.0) > frame.det[b].score.value_or(0.0);
    });

    std::vector<bool> taken(frame.gt.size(), false);
    for (std::size_t d : order) {
      const ObjectRecord& det = frame.det[d];
      std::size_t best = frame.gt.size();
      double best_iou = -1.0;
      bool hits_ignored = false;
      for (std::size_t g = 0; g < frame.gt.size(); ++g) {
        if (gt_state[g] == 0 || taken[g]) continue;
        const double o = iou(det, frame.gt[g]);
        if (o < cfg.iou_threshold) continue;
        if (gt_state[g] == 2) {
          hits_ignored = true;
        } else if (o > best_iou) {
          best_iou = o;
          best = g;
        }
      }
      const double score = det.score.value_or(0.0);
      if (best < frame.gt.size()) {
        taken[best] = true;
        scored.push_back({score, true});
      } else if (!hits_ignored && det.bbox.height() >= min_height) {
        scored.push_back({score, false});
      }
    }
  }

  if (result.num_gt == 0) return result;
  result.applicable = true;

  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) { return a.score > b.score; });
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (const Scored& s : scored) {
    (s.tp ? tp : fp) += 1;
    result.curve.push_back({static_cast<double>(tp) / static_cast<double>(result.num_gt),
                            static_cast<double>(tp) / static_cast<double>(tp + fp), s.score});
  }
  result.true_positives = tp;
  result.false_positives = fp;
  result.ap = interpolated_ap(result.curve, cfg.mode);
  return result;
}

std::vector<ApRow> evaluate_all(const std::vector<FrameRecords>& frames, const std::string& cls,
                                ApMode mode, const std::vector<double>& iou_thresholds,
                                const DifficultyThresholds& thresholds) {
  std::vector<ApRow> rows;
  const std::array<std::pair<const char*, RecordIou>, 2> metrics{
      std::pair<const char*, RecordIou>{"bev", record_bev_iou},
      std::pair<const char*, RecordIou>{"3d", record_iou3d}};
  for (const auto& [name, fn] : metrics) {
    for (double thr : iou_thresholds) {
      for (Difficulty d : {Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard}) {
        ApConfig cfg{cls, thr, d, mode, thresholds};
        rows.push_back({name, cls, d, thr, average_precision(frames, fn, cfg)});
      }
    }
  }
  return rows;
}

std::string format_results_table(const std::vector<ApRow>& rows) {
  std::string out = "metric\tclass\tdifficulty\tiou\tap\n";
  char buf[64];
  for (const ApRow& r : rows) {
    out += r.metric + '\t' + r.cls + '\t' + std::string(to_string(r.difficulty)) + '\t';
    std::snprintf(buf, sizeof(buf), "%.2f", r.iou_threshold);
    out += buf;
    out += '\t';
    if (r.result.applicable) {
      std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * r.result.ap);
      out += buf;
    } else {
      out += "n/a";
    }
    out += '\n';
  }
  return out;
}

}  // namespace stereo3d
