#pragma once

// KITTI object-benchmark text formats: calibration files, label/detection
// rows and the easy/moderate/hard difficulty buckets.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stereo3d/geometry.hpp"

namespace stereo3d {

struct ObjectRecord {
  std::string type = "Car";
  double truncated = 0.0;
  int occluded = 0;
  double alpha = 0.0;
  PixelBox bbox;
  double h = 1.0;
  double w = 1.0;
  double l = 1.0;
  double x = 0.0;
  double y = 0.0;  // bottom of the box, as in the devkit
  double z = 1.0;
  double rotation_y = 0.0;
  std::optional<double> score;

  bool is_dont_care() const { return type == "DontCare"; }
  bool operator==(const ObjectRecord&) const = default;
};

using Matrix34 = std::array<double, 12>;  // row-major 3x4

struct CalibBundle {
  Matrix34 p2{};
  Matrix34 p3{};
  CameraRig rig;
};

/// Reads P2 and P3; other keys are ignored. Throws ParseError (with the line
/// number) for malformed rows and for missing P2/P3.
CalibBundle parse_calib(std::string_view text);

/// Writes P0..P3, R0_rect, Tr_velo_to_cam and Tr_imu_to_velo. P0/P1 reuse the
/// left intrinsics without translation; the remaining matrices are identity.
std::string write_calib(const CalibBundle& calib);

/// Builds projection matrices for a rectified pair from a rig.
CalibBundle calib_from_rig(const CameraRig& rig);

/// Throws ParseError with the 1-based line number on a wrong field count or
/// a non-numeric field. Blank lines are skipped.
std::vector<ObjectRecord> parse_labels(std::string_view text);
std::string write_labels(const std::vector<ObjectRecord>& records);

/// Shortest round-tripping decimal with at least two fractional digits.
std::string format_float(double value);

enum class Difficulty : std::uint8_t { Easy, Moderate, Hard, Ignored };

std::string_view to_string(Difficulty d);

struct DifficultyThresholds {
  std::array<double, 3> min_height{40.0, 25.0, 25.0};
  std::array<int, 3> max_occlusion{0, 1, 2};
  std::array<double, 3> max_truncation{0.15, 0.30, 0.50};
};

/// Tightest bucket whose thresholds the record meets.
Difficulty difficulty_of(const ObjectRecord& rec, const DifficultyThresholds& t = {});

/// Whether the record counts for `bucket` in evaluation. Buckets are
/// cumulative: an Easy object also counts for Moderate and Hard.
bool meets_difficulty(const ObjectRecord& rec, Difficulty bucket,
                      const DifficultyThresholds& t = {});

/// Record geometry to our box convention and back. The devkit's rotation_y is
/// measured from the camera x axis; our yaw is measured from z, hence a
/// quarter-turn offset.
Box3D box_from_record(const ObjectRecord& rec);
void set_record_box(ObjectRecord& rec, const Box3D& box);

/// The devkit's alpha is measured from the same axis as its rotation_y.
double record_alpha_from_allocentric(double alpha);
double allocentric_from_record_alpha(double alpha);

std::string frame_filename(std::size_t frame, std::string_view extension);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Sorted frame ids of "NNNNNN.txt" files in a directory.
std::vector<std::size_t> list_frames(const std::filesystem::path& dir);

}  // namespace stereo3d
