#pragma once

// Batch pipeline behind the stereo3d command-line tool. Kept in a library so
// tests can drive the subcommands without spawning processes.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stereo3d/costvol.hpp"
#include "stereo3d/eval.hpp"
#include "stereo3d/geometry.hpp"
#include "stereo3d/kitti.hpp"
#include "stereo3d/solver.hpp"
#include "stereo3d/synth.hpp"

namespace stereo3d::pipeline {

struct RunConfig {
  std::filesystem::path input_dir;   // scene root (synth writes here too)
  std::filesystem::path output_dir;  // detections
  std::filesystem::path gt_dir;      // eval: scene root or a label directory
  std::filesystem::path det_dir;     // eval/refine: detection directory

  bool reweight = true;
  bool attention = true;
  bool box_estimation = true;
  bool dense_alignment = true;

  double grid_z_min = 5.0;
  double grid_z_max = 50.0;
  std::size_t grid_levels = 46;
  /// Replace the global grid per object with grid_levels levels spanning
  /// the depth range implied by the stereo box pair, widened by rho.
  bool per_object_grid = false;

  std::size_t channels = 8;
  int downsample = 4;
  double roi_margin = 2.0;
  /// Restrict the cost-volume RoI to the observation's visible columns, so
  /// an occluder inside the 2D box does not dominate the level scores.
  bool visible_roi = true;
  double readout_sharpness = 20.0;
  std::uint64_t head_seed = 1;

  GNConfig gn;
  double kappa = 0.1;
  double rho = 0.3;
  AlignSearch align;
  /// Pixels of disparity the alignment search covers around the cost-volume
  /// depth; the depth window is the larger of this and align.half_window.
  double align_disparity_window = 2.0;

  // synth
  std::size_t frames = 10;
  SceneSpec scene;
  double feature_noise = 0.0;

  // eval
  std::string eval_class = "Car";
  ApMode ap_mode = ApMode::Eleven;
  std::vector<double> iou_thresholds{0.5, 0.7};

  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  DepthGrid grid() const;
  /// Throws ArgumentError naming the offending key.
  void validate() const;
};

/// Flat "key = value" lines; '#' starts a comment. Unknown keys and bad
/// values throw ParseError with the line number. Keys not present keep their
/// defaults.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Generates cfg.frames scenes into cfg.input_dir. Frame f uses scene seed
/// derived from (cfg.seed, f), so reruns reproduce the directory.
void cmd_synth(const RunConfig& cfg);

struct ObjectOutcome {
  bool ok = false;
  std::string error;
  double z_initial = 0.0;  // cost-volume expectation
  double z_final = 0.0;
  ObjectRecord record;
};

struct EstimateReport {
  std::size_t frames = 0;
  std::size_t objects = 0;
  std::size_t failures = 0;
  /// Mean |z - z_gt| against label_2 when ground truth is present; -1 otherwise.
  double mean_abs_initial_error = -1.0;
  double mean_abs_final_error = -1.0;
  double grid_step = 0.0;
};

/// Everything needed to estimate one frame, loaded from a scene directory.
struct FrameInput {
  std::size_t frame = 0;
  CameraRig rig = kitti_like_rig();
  GrayImage left;
  GrayImage right;
  FeatureMap left_features{1, 1, 1};
  FeatureMap right_features{1, 1, 1};
  std::vector<Observation> observations;
};

FrameInput load_frame(const std::filesystem::path& root, std::size_t frame);

/// One object through cost volume, expectation, box estimation and dense
/// alignment, as enabled in cfg. Never throws; failures land in `error`.
ObjectOutcome estimate_object(const FrameInput& in, const Observation& obs,
                              const RunConfig& cfg, const ConvStack& stack);

/// Writes one KITTI detection file per observation file under output_dir and
/// a depth_report.tsv when ground-truth labels are available.
EstimateReport cmd_estimate(const RunConfig& cfg);

/// Solver-only pass: re-runs dense alignment and box estimation from the
/// depths of existing detections (det_dir) using the scene in input_dir.
EstimateReport cmd_refine(const RunConfig& cfg);

struct EvalOutput {
  std::vector<ApRow> rows;
  std::string table;
  std::vector<std::string> warnings;
};

EvalOutput cmd_eval(const RunConfig& cfg);

}  // namespace stereo3d::pipeline
