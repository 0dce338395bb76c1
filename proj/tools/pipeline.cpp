#include "pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "stereo3d/errors.hpp"

namespace stereo3d::pipeline {
namespace fs = std::filesystem;
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& v, std::size_t line) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ParseError("expected a number, got '" + v + "'", line);
  }
  return out;
}

long long to_int(const std::string& v, std::size_t line) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ParseError("expected an integer, got '" + v + "'", line);
  }
  return out;
}

std::size_t to_count(const std::string& v, std::size_t line) {
  const long long n = to_int(v, line);
  if (n < 0) throw ParseError("expected a non-negative integer, got '" + v + "'", line);
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& v, std::size_t line) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ParseError("expected on/off, got '" + v + "'", line);
}

using Setter = std::function<void(RunConfig&, const std::string&, std::size_t)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"input_dir", [](RunConfig& c, const std::string& v, std::size_t) { c.input_dir = v; }},
      {"output_dir", [](RunConfig& c, const std::string& v, std::size_t) { c.output_dir = v; }},
      {"gt_dir", [](RunConfig& c, const std::string& v, std::size_t) { c.gt_dir = v; }},
      {"det_dir", [](RunConfig& c, const std::string& v, std::size_t) { c.det_dir = v; }},
      {"reweight", [](RunConfig& c, const std::string& v, std::size_t l) { c.reweight = to_bool(v, l); }},
      {"attention", [](RunConfig& c, const std::string& v, std::size_t l) { c.attention = to_bool(v, l); }},
      {"box_estimation",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.box_estimation = to_bool(v, l); }},
      {"dense_alignment",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.dense_alignment = to_bool(v, l); }},
      {"grid.z_min", [](RunConfig& c, const std::string& v, std::size_t l) { c.grid_z_min = to_double(v, l); }},
      {"grid.z_max", [](RunConfig& c, const std::string& v, std::size_t l) { c.grid_z_max = to_double(v, l); }},
      {"grid.levels", [](RunConfig& c, const std::string& v, std::size_t l) { c.grid_levels = to_count(v, l); }},
      {"grid.per_object",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.per_object_grid = to_bool(v, l); }},
      {"visible_roi",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.visible_roi = to_bool(v, l); }},
      {"channels", [](RunConfig& c, const std::string& v, std::size_t l) { c.channels = to_count(v, l); }},
      {"downsample",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.downsample = static_cast<int>(to_int(v, l)); }},
      {"roi_margin", [](RunConfig& c, const std::string& v, std::size_t l) { c.roi_margin = to_double(v, l); }},
      {"readout_sharpness",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.readout_sharpness = to_double(v, l); }},
      {"head_seed", [](RunConfig& c, const std::string& v, std::size_t l) { c.head_seed = to_count(v, l); }},
      {"gn.max_iters",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.gn.max_iters = static_cast<int>(to_int(v, l)); }},
      {"gn.lambda", [](RunConfig& c, const std::string& v, std::size_t l) { c.gn.lambda = to_double(v, l); }},
      {"gn.tol", [](RunConfig& c, const std::string& v, std::size_t l) { c.gn.tol = to_double(v, l); }},
      {"kappa", [](RunConfig& c, const std::string& v, std::size_t l) { c.kappa = to_double(v, l); }},
      {"rho", [](RunConfig& c, const std::string& v, std::size_t l) { c.rho = to_double(v, l); }},
      {"align.half_window",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.align.half_window = to_double(v, l); }},
      {"align.disparity_window",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.align_disparity_window = to_double(v, l); }},
      {"align.steps",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.align.steps = static_cast<int>(to_int(v, l)); }},
      {"frames", [](RunConfig& c, const std::string& v, std::size_t l) { c.frames = to_count(v, l); }},
      {"feature_noise",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.feature_noise = to_double(v, l); }},
      {"scene.n_objects",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.scene.n_objects = static_cast<int>(to_int(v, l)); }},
      {"scene.depth_min", [](RunConfig& c, const std::string& v, std::size_t l) { c.scene.depth.lo = to_double(v, l); }},
      {"scene.depth_max", [](RunConfig& c, const std::string& v, std::size_t l) { c.scene.depth.hi = to_double(v, l); }},
      {"scene.lateral_min",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.scene.lateral.lo = to_double(v, l); }},
      {"scene.lateral_max",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.scene.lateral.hi = to_double(v, l); }},
      {"scene.yaw_min", [](RunConfig& c, const std::string& v, std::size_t l) { c.scene.yaw.lo = to_double(v, l); }},
      {"scene.yaw_max", [](RunConfig& c, const std::string& v, std::size_t l) { c.scene.yaw.hi = to_double(v, l); }},
      {"scene.texture",
       [](RunConfig& c, const std::string& v, std::size_t l) {
         try {
           c.scene.texture = texture_from_string(v);
         } catch (const ArgumentError& e) {
           throw ParseError(e.what(), l);
         }
       }},
      {"scene.texture_scale",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.scene.texture_scale = to_double(v, l); }},
      {"scene.allow_occlusion",
       [](RunConfig& c, const std::string& v, std::size_t l) { c.scene.allow_occlusion = to_bool(v, l); }},
      {"eval.class", [](RunConfig& c, const std::string& v, std::size_t) { c.eval_class = v; }},
      {"eval.ap_mode",
       [](RunConfig& c, const std::string& v, std::size_t l) {
         if (v == "11") {
           c.ap_mode = ApMode::Eleven;
         } else if (v == "40") {
           c.ap_mode = ApMode::Forty;
         } else {
           throw ParseError("eval.ap_mode must be 11 or 40", l);
         }
       }},
      {"eval.iou_thresholds",
       [](RunConfig& c, const std::string& v, std::size_t l) {
         c.iou_thresholds.clear();
         std::stringstream ss(v);
         for (std::string item; std::getline(ss, item, ',');) {
           c.iou_thresholds.push_back(to_double(trim(item), l));
         }
       }},
      {"seed", [](RunConfig& c, const std::string& v, std::size_t l) { c.seed = to_count(v, l); }},
      {"jobs", [](RunConfig& c, const std::string& v, std::size_t l) { c.jobs = to_count(v, l); }},
  };
  return table;
}

std::uint64_t frame_seed(std::uint64_t seed, std::size_t frame) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(frame) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

fs::path require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw std::runtime_error("missing file " + path.string());
  return path;
}

Box3D box_of(const Pose2& pose, double z, const BoxDims& dims) {
  return {pose.x, pose.y, z, dims.w, dims.h, dims.l, pose.theta};
}

// Box estimation, dense alignment and the final re-solve, starting at z0.
ObjectOutcome refine_from_depth(const FrameInput& in, const Observation& obs, const RunConfig& cfg,
                                double z0) {
  ObjectOutcome out;
  out.z_initial = z0;
  try {
    const CameraRig& rig = in.rig;
    const Measurements5 meas = Measurements5::from_pixels(obs.boxes.left, obs.keypoint_u, rig);
    auto solve = [&](double z, double theta_hint) {
      Pose2 init = initial_pose_from_network(obs.boxes, z, obs.alpha, rig);
      init.theta = theta_hint;
      if (!cfg.box_estimation) return init;
      const PoseConstraints cons =
          truncation_constraints(obs.boxes.left, in.left.width(), in.left.height(), init.theta);
      const PoseEstimate est =
          estimate_box_pose(meas, obs.dims, z, init, obs.keypoint, cfg.gn, cons);
      // Stationary is the normal outcome here: z comes from the network, so
      // the measurements are never reproduced exactly.
      if (!est.converged() && est.status != SolveStatus::Stationary) {
        spdlog::debug("box estimation did not converge (residual {:.3g})", est.residual_norm);
      }
      return est.pose;
    };

    double z = z0;
    Pose2 pose = solve(z, initial_pose_from_network(obs.boxes, z, obs.alpha, rig).theta);

    const VisibleRange vr{normalize_u(obs.visible_u1, rig), normalize_u(obs.visible_u2, rig),
                          obs.occlusion_level};
    if (cfg.dense_alignment && vr.valid()) {
      const ShrinkResult shrunk = shrink_visible_range(vr, cfg.kappa);
      if (!shrunk.degenerate) {
        // The cost volume's depth error grows with z^2 at fixed disparity
        // error, so the search window is sized in disparity.
        const double v_top = normalize_v(obs.boxes.left.v1, rig);
        const double v_bottom = normalize_v(obs.boxes.left.v2, rig);
        AlignSearch coarse = cfg.align;
        coarse.half_window = std::max(cfg.align.half_window,
                                      z * z * cfg.align_disparity_window / rig.focal_baseline());
        coarse.half_window = std::min(coarse.half_window, 0.9 * z);
        AlignResult aligned =
            dense_align(in.left, in.right, shrunk.range, v_top, v_bottom, z, coarse, rig);
        if (aligned.status == AlignStatus::Refined) {
          const double step = 2.0 * coarse.half_window / static_cast<double>(coarse.steps - 1);
          AlignSearch fine{2.0 * step, cfg.align.steps};
          aligned = dense_align(in.left, in.right, shrunk.range, v_top, v_bottom, aligned.z, fine,
                                rig);
        }
        if (aligned.status == AlignStatus::Refined) {
          z = aligned.z;
          pose = solve(z, pose.theta);
        }
      }
    }

    out.z_final = z;
    ObjectRecord& r = out.record;
    r.type = obs.type;
    r.truncated = obs.truncated;
    r.occluded = obs.occlusion_level;
    r.alpha = record_alpha_from_allocentric(allocentric_from_egocentric(pose.theta, pose.x, z));
    r.bbox = obs.boxes.left;
    set_record_box(r, box_of(pose, z, obs.dims));
    r.score = obs.score;
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

struct FrameResult {
  std::vector<ObjectOutcome> outcomes;
};

EstimateReport write_results(const RunConfig& cfg, const std::vector<std::size_t>& frames,
                             const std::vector<FrameResult>& results) {
  fs::create_directories(cfg.output_dir);
  EstimateReport report;
  report.frames = frames.size();
  report.grid_step = cfg.grid().step();
  double err0 = 0.0, err1 = 0.0;
  std::size_t with_gt = 0;
  std::string tsv = "frame\tobject\tz_gt\tz_initial\tz_final\n";
  for (std::size_t f = 0; f < frames.size(); ++f) {
    std::vector<ObjectRecord> records;
    const fs::path label = cfg.input_dir / "label_2" / frame_filename(frames[f], ".txt");
    std::vector<ObjectRecord> gt;
    if (fs::is_regular_file(label)) gt = parse_labels(read_text_file(label));
    const auto& outcomes = results[f].outcomes;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      ++report.objects;
      const ObjectOutcome& o = outcomes[k];
      if (!o.ok) {
        ++report.failures;
        spdlog::warn("frame {} object {}: {}", frames[f], k, o.error);
        continue;
      }
      records.push_back(o.record);
      if (k < gt.size()) {
        ++with_gt;
        err0 += std::abs(o.z_initial - gt[k].z);
        err1 += std::abs(o.z_final - gt[k].z);
        tsv += std::to_string(frames[f]) + '\t' + std::to_string(k) + '\t' + format_float(gt[k].z) +
               '\t' + format_float(o.z_initial) + '\t' + format_float(o.z_final) + '\n';
      }
    }
    write_text_file(cfg.output_dir / frame_filename(frames[f], ".txt"), write_labels(records));
  }
  if (with_gt > 0) {
    report.mean_abs_initial_error = err0 / static_cast<double>(with_gt);
    report.mean_abs_final_error = err1 / static_cast<double>(with_gt);
    write_text_file(cfg.output_dir / "depth_report.tsv", tsv);
    spdlog::info("depth error over {} objects: initial {:.4f} m, final {:.4f} m (grid step {:.3f} m)",
                 with_gt, report.mean_abs_initial_error, report.mean_abs_final_error,
                 report.grid_step);
  }
  return report;
}

std::vector<std::size_t> scene_frames(const RunConfig& cfg) {
  const fs::path obs_dir = cfg.input_dir / "observations";
  if (!fs::is_directory(obs_dir)) {
    throw std::runtime_error("missing directory " + obs_dir.string());
  }
  return list_frames(obs_dir);
}

}  // namespace

DepthGrid RunConfig::grid() const { return uniform_depth_grid(grid_z_min, grid_z_max, grid_levels); }

void RunConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ArgumentError("config key '" + key + "' " + why);
  };
  if (!(grid_z_min > 0.0 && grid_z_min < grid_z_max)) fail("grid.z_min", "must satisfy 0 < z_min < z_max");
  if (grid_levels < 2) fail("grid.levels", "must be >= 2");
  if (channels < 1) fail("channels", "must be >= 1");
  if (downsample < 1) fail("downsample", "must be >= 1");
  if (!(roi_margin >= 0.0)) fail("roi_margin", "must be >= 0");
  if (!(readout_sharpness > 0.0)) fail("readout_sharpness", "must be positive");
  if (gn.max_iters < 1) fail("gn.max_iters", "must be >= 1");
  if (!(gn.lambda > 0.0)) fail("gn.lambda", "must be positive");
  if (!(gn.tol > 0.0)) fail("gn.tol", "must be positive");
  if (!(kappa >= 0.0 && kappa < 0.5)) fail("kappa", "must lie in [0, 0.5)");
  if (!(rho > 0.0)) fail("rho", "must be positive");
  if (!(align.half_window > 0.0)) fail("align.half_window", "must be positive");
  if (align.steps < 3) fail("align.steps", "must be >= 3");
  if (!(align_disparity_window >= 0.0)) fail("align.disparity_window", "must be >= 0");
  if (!(feature_noise >= 0.0)) fail("feature_noise", "must be >= 0");
  if (iou_thresholds.empty()) fail("eval.iou_thresholds", "must list at least one value");
  for (double t : iou_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) fail("eval.iou_thresholds", "values must lie in (0, 1]");
  }
  try {
    scene.validate();
  } catch (const ArgumentError& e) {
    fail("scene.*", e.what());
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::stringstream ss{std::string(text)};
  for (std::string raw; std::getline(ss, raw);) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError("unknown config key '" + key + "'", line_no);
    it->second(cfg, value, line_no);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  try {
    return parse_config(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void cmd_synth(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.input_dir);
  const DepthGrid grid = cfg.grid();
  parallel_for(cfg.frames, cfg.jobs, [&](std::size_t f) {
    SceneSpec spec = cfg.scene;
    spec.seed = frame_seed(cfg.seed, f);
    const SyntheticScene scene = generate_scene(spec);
    OracleOptions opts;
    opts.channels = cfg.channels;
    opts.downsample = cfg.downsample;
    opts.roi_margin = cfg.roi_margin;
    opts.noise_sigma = cfg.feature_noise;
    opts.seed = spec.seed;
    write_scene_frame(cfg.input_dir, f, scene, oracle_features(scene, grid, opts));
  });
  spdlog::info("wrote {} frames to {}", cfg.frames, cfg.input_dir.string());
}

FrameInput load_frame(const fs::path& root, std::size_t frame) {
  FrameInput in;
  in.frame = frame;
  const fs::path calib = require_file(root / "calib" / frame_filename(frame, ".txt"));
  try {
    in.rig = parse_calib(read_text_file(calib)).rig;
  } catch (const ParseError& e) {
    throw ParseError(calib.string() + ": " + e.what());
  }
  in.left = read_pgm_file(require_file(root / "image_2" / frame_filename(frame, ".pgm")));
  in.right = read_pgm_file(require_file(root / "image_3" / frame_filename(frame, ".pgm")));
  in.left_features = FeatureMap(
      read_tensor_file(require_file(root / "features" / frame_filename(frame, "_left.bin"))));
  in.right_features = FeatureMap(
      read_tensor_file(require_file(root / "features" / frame_filename(frame, "_right.bin"))));
  const fs::path obs = require_file(root / "observations" / frame_filename(frame, ".txt"));
  try {
    in.observations = parse_observations(read_text_file(obs));
  } catch (const ParseError& e) {
    throw ParseError(obs.string() + ": " + e.what());
  }
  return in;
}

ObjectOutcome estimate_object(const FrameInput& in, const Observation& obs, const RunConfig& cfg,
                              const ConvStack& stack) {
  double z0 = 0.0;
  try {
    const CameraRig frig = in.rig.scaled(1.0 / static_cast<double>(cfg.downsample));
    DepthGrid grid = cfg.grid();
    if (cfg.per_object_grid) {
      const auto [lo, hi] = depth_range_from_box_pair(obs.boxes, in.rig, {cfg.rho, 1.0});
      grid = uniform_depth_grid(lo, hi, cfg.grid_levels);
    }
    Roi roi = feature_roi(obs.boxes.left, cfg.downsample, cfg.roi_margin);
    if (cfg.visible_roi && obs.visible_u2 > obs.visible_u1) {
      // A side cut by the visible range borders an occluder, not background,
      // so it gets no margin. Whole-column rounding alone moves a side by
      // up to 2 px and does not count as a cut.
      const double f = 1.0 / static_cast<double>(cfg.downsample);
      const double slack = 2.0;
      if (obs.visible_u1 > obs.boxes.left.u1 + slack) roi.x0 = to_feature_coord(obs.visible_u1, f);
      if (obs.visible_u2 < obs.boxes.left.u2 - slack) roi.x1 = to_feature_coord(obs.visible_u2, f);
    }
    const auto out_w = static_cast<std::size_t>(std::max(1L, std::lround(roi.width())));
    const auto out_h = static_cast<std::size_t>(std::max(1L, std::lround(roi.height())));
    CostVolume cv =
        build_cost_volume(in.left_features, in.right_features, roi, roi, grid, frig, out_h, out_w);
    if (cfg.reweight) cv = match_reweight(cv);
    if (cfg.attention) cv = structure_attention(cv, stack.attention);
    const double sharpness = cfg.readout_sharpness;
    const DepthPMF pmf = depth_head(cv, stack, [sharpness](const CostVolume& v) {
      return correlation_logits(v, sharpness);
    });
    z0 = expected_depth(pmf);
  } catch (const std::exception& e) {
    ObjectOutcome out;
    out.error = e.what();
    return out;
  }
  return refine_from_depth(in, obs, cfg, z0);
}

EstimateReport cmd_estimate(const RunConfig& cfg) {
  cfg.validate();
  const std::vector<std::size_t> frames = scene_frames(cfg);
  const ConvStack stack = ConvStack::random(2 * cfg.channels, cfg.head_seed);
  std::vector<FrameResult> results(frames.size());
  parallel_for(frames.size(), cfg.jobs, [&](std::size_t f) {
    const FrameInput in = load_frame(cfg.input_dir, frames[f]);
    if (in.left_features.channels() != cfg.channels) {
      throw ArgumentError("frame " + std::to_string(frames[f]) + " features have " +
                          std::to_string(in.left_features.channels()) +
                          " channels, config expects " + std::to_string(cfg.channels));
    }
    for (const Observation& obs : in.observations) {
      results[f].outcomes.push_back(estimate_object(in, obs, cfg, stack));
    }
  });
  return write_results(cfg, frames, results);
}

EstimateReport cmd_refine(const RunConfig& cfg) {
  cfg.validate();
  const std::vector<std::size_t> frames = scene_frames(cfg);
  std::vector<FrameResult> results(frames.size());
  parallel_for(frames.size(), cfg.jobs, [&](std::size_t f) {
    const FrameInput in = load_frame(cfg.input_dir, frames[f]);
    const fs::path det_path = require_file(cfg.det_dir / frame_filename(frames[f], ".txt"));
    const std::vector<ObjectRecord> dets = parse_labels(read_text_file(det_path));
    if (dets.size() != in.observations.size()) {
      spdlog::warn("frame {}: {} detections for {} observations; pairing by index", frames[f],
                   dets.size(), in.observations.size());
    }
    const std::size_t n = std::min(dets.size(), in.observations.size());
    for (std::size_t k = 0; k < n; ++k) {
      Observation obs = in.observations[k];
      if (dets[k].score) obs.score = *dets[k].score;
      results[f].outcomes.push_back(refine_from_depth(in, obs, cfg, dets[k].z));
    }
  });
  return write_results(cfg, frames, results);
}

EvalOutput cmd_eval(const RunConfig& cfg) {
  cfg.validate();
  EvalOutput out;
  const fs::path gt_dir = fs::is_directory(cfg.gt_dir / "label_2") ? cfg.gt_dir / "label_2" : cfg.gt_dir;
  if (!fs::is_directory(gt_dir)) throw std::runtime_error("missing directory " + gt_dir.string());
  const std::vector<std::size_t> gt_frames = list_frames(gt_dir);
  const std::vector<std::size_t> det_frames = list_frames(cfg.det_dir);
  if (det_frames.empty()) {
    out.warnings.push_back("no detection files in " + cfg.det_dir.string());
  }

  std::vector<FrameRecords> frames;
  for (std::size_t f : gt_frames) {
    FrameRecords fr;
    fr.gt = parse_labels(read_text_file(gt_dir / frame_filename(f, ".txt")));
    const fs::path det = cfg.det_dir / frame_filename(f, ".txt");
    if (fs::is_regular_file(det)) {
      fr.det = parse_labels(read_text_file(det));
    } else if (!det_frames.empty()) {
      out.warnings.push_back("no detections for frame " + frame_filename(f, ""));
    }
    frames.push_back(std::move(fr));
  }
  for (std::size_t f : det_frames) {
    if (!std::binary_search(gt_frames.begin(), gt_frames.end(), f)) {
      out.warnings.push_back("detections for frame " + frame_filename(f, "") +
                             " have no ground truth");
    }
  }
  for (const std::string& w : out.warnings) spdlog::warn("{}", w);

  out.rows = evaluate_all(frames, cfg.eval_class, cfg.ap_mode, cfg.iou_thresholds);
  out.table = format_results_table(out.rows);
  return out;
}

}  // namespace stereo3d::pipeline
