#pragma once

// Deterministic synthetic stereo scenes: boxes on a ground plane, rendered as
// textured fronto-parallel billboards into a rectified pair, plus fabricated
// feature maps whose cost-volume match peaks at a known depth level.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stereo3d/costvol.hpp"
#include "stereo3d/geometry.hpp"
#include "stereo3d/image.hpp"
#include "stereo3d/kitti.hpp"
#include "stereo3d/solver.hpp"
#include "stereo3d/tensor.hpp"

namespace stereo3d {

enum class TextureKind : std::uint8_t { Checker, Noise };

std::string_view to_string(TextureKind kind);
TextureKind texture_from_string(std::string_view text);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  int n_objects = 4;
  Range depth{10.0, 40.0};
  Range lateral{-8.0, 8.0};
  Range width{1.5, 1.9};
  Range height{1.4, 1.7};
  Range length{3.5, 4.5};
  Range yaw{-0.25, 2.5};
  int image_width = 1242;
  int image_height = 375;
  TextureKind texture = TextureKind::Checker;
  double texture_scale = 4.0;  // pixels per texel
  double camera_height = 1.65;
  double background = 0.25;
  /// When false, objects are placed so that their footprints (both views,
  /// padded) never overlap.
  bool allow_occlusion = true;
  double occlusion_low = 0.10;   // below: level 0
  double occlusion_high = 0.50;  // below: level 1, else level 2
  double min_box_width = 8.0;    // px
  double border_margin = 12.0;   // px, kept free around every footprint
  int max_attempts = 400;        // placement retries per object

  /// Throws ArgumentError for empty ranges or a negative object count.
  void validate() const;
};

struct SyntheticObject {
  std::string type = "Car";
  Box3D box;
  StereoBoxPair boxes;        // pixel boxes from the projection model
  CornerType keypoint = kDefaultKeypoint;
  double keypoint_u = 0.0;    // px
  double alpha = 0.0;         // allocentric
  double disparity = 0.0;     // rendered shift, px
  double occluded_fraction = 0.0;
  int occlusion_level = 0;
  double visible_u1 = 0.0;    // px, inclusive columns of the visible run
  double visible_u2 = 0.0;
  bool has_visible_range = false;
  std::uint64_t texture_seed = 0;
  double texture_lo = 0.0;
  double texture_hi = 1.0;

  VisibleRange visible_range(const CameraRig& rig) const;
};

struct SyntheticScene {
  SceneSpec spec;
  CameraRig rig = kitti_like_rig();
  std::vector<SyntheticObject> objects;  // near to far
  GrayImage left;
  GrayImage right;
  std::vector<int> left_owner;   // object index per pixel, -1 background
  std::vector<int> right_owner;
};

/// Places objects, renders both views and annotates occlusion and visible
/// ranges. Objects that cannot be placed within max_attempts are dropped, so
/// the scene may hold fewer than n_objects.
SyntheticScene generate_scene(const SceneSpec& spec, const CameraRig& rig = kitti_like_rig());

struct StereoRender {
  GrayImage left;
  GrayImage right;
  std::vector<int> left_owner;
  std::vector<int> right_owner;
};

/// Painter's order far to near. The right view samples the same continuous
/// texture shifted by the object's disparity.
StereoRender render_stereo(const SyntheticScene& scene);

/// Continuous billboard texture value at (s, t) px from the box's top-left.
double texture_value(const SyntheticObject& obj, TextureKind kind, double scale, double s,
                     double t);

struct OracleObject {
  std::size_t true_level = 0;
  double disparity = 0.0;  // feature px, at the true level's depth
  Roi roi;                 // left RoI; sampling this at out_h x out_w hits cell centers
  std::size_t out_h = 1;
  std::size_t out_w = 1;
};

struct OracleFeatures {
  FeatureMap left;
  FeatureMap right;
  std::vector<OracleObject> objects;  // same order as scene.objects
};

struct OracleOptions {
  std::size_t channels = 8;
  int downsample = 4;          // feature stride R
  double roi_margin = 2.0;     // feature px around the footprint
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Feature maps of size ceil(H / R) x ceil(W / R). Each object carries one
/// random unit vector on its left footprint; the right map copies the left
/// map shifted by the disparity of the object's nearest grid level, so the
/// cost-volume level scores peak there. Throws ArgumentError when an object
/// lies outside the grid's depth range.
OracleFeatures oracle_features(const SyntheticScene& scene, const DepthGrid& grid,
                               const OracleOptions& options);

/// Feature-space RoI around a pixel box, expanded by `margin` feature px.
Roi feature_roi(const PixelBox& box, int downsample, double margin);

/// Per-object observation line consumed by the estimator: what a 2D stereo
/// detector would output, plus the visible range.
struct Observation {
  std::string type = "Car";
  StereoBoxPair boxes;
  BoxDims dims;
  double alpha = 0.0;
  double keypoint_u = 0.0;
  CornerType keypoint = kDefaultKeypoint;
  double visible_u1 = 0.0;
  double visible_u2 = 0.0;
  int occlusion_level = 0;
  double truncated = 0.0;
  double score = 1.0;
};

Observation observation_of(const SyntheticObject& obj);
std::string write_observations(const std::vector<Observation>& obs);
/// Throws ParseError with the line number on malformed rows.
std::vector<Observation> parse_observations(std::string_view text);

/// KITTI label rows for the scene's ground truth.
std::vector<ObjectRecord> scene_labels(const SyntheticScene& scene);

/// Writes calib/, label_2/, image_2/, image_3/, observations/ and, when
/// given, features/ entries for one frame under `root`.
void write_scene_frame(const std::filesystem::path& root, std::size_t frame,
                       const SyntheticScene& scene,
                       const std::optional<OracleFeatures>& features = std::nullopt);

}  // namespace stereo3d
