#include "stereo3d/kitti.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "stereo3d/errors.hpp"

namespace stereo3d {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Calls fn(line_number, line) for each line; handles a missing final newline.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    fn(++line_no, text.substr(pos, end - pos));
    pos = end + 1;
  }
}

double parse_double(std::string_view field, std::size_t line_no) {
  // from_chars rejects a leading '+', which some writers emit
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw ParseError("expected a number, got '" + std::string(field) + "'", line_no);
  }
  return value;
}

int parse_int(std::string_view field, std::size_t line_no) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError("expected an integer, got '" + std::string(field) + "'", line_no);
  }
  return value;
}

void append_matrix(std::string& out, std::string_view key, std::span<const double> values) {
  out += key;
  out += ':';
  char buf[64];
  for (double v : values) {
    std::snprintf(buf, sizeof(buf), " %.12e", v);
    out += buf;
  }
  out += '\n';
}

}  // namespace

std::string format_float(double value) {
  char buf[512];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  if (ec != std::errc{}) throw ArgumentError("cannot format value");
  std::string s(buf, ptr);
  const std::size_t dot = s.find('.');
  if (dot == std::string::npos) {
    s += ".00";
  } else if (s.size() - dot - 1 < 2) {
    s.append(2 - (s.size() - dot - 1), '0');
  }
  return s;
}

CalibBundle parse_calib(std::string_view text) {
  std::optional<Matrix34> p2;
  std::optional<Matrix34> p3;
  std::size_t p3_line = 0;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto fields = split_fields(line);
    if (fields.empty()) return;
    std::string_view key = fields[0];
    if (key.empty() || key.back() != ':') {
      throw ParseError("expected 'KEY:' at start of line", line_no);
    }
    key.remove_suffix(1);
    if (key != "P2" && key != "P3") return;
    if (fields.size() != 13) {
      throw ParseError(std::string(key) + " needs 12 values, got " +
                           std::to_string(fields.size() - 1),
                       line_no);
    }
    Matrix34 m{};
    for (std::size_t k = 0; k < 12; ++k) m[k] = parse_double(fields[k + 1], line_no);
    if (key == "P2") {
      p2 = m;
    } else {
      p3 = m;
      p3_line = line_no;
    }
  });
  if (!p2) throw ParseError("calibration is missing P2");
  if (!p3) throw ParseError("calibration is missing P3");

  const double fu = (*p2)[0];
  if (!(fu > 0.0)) throw ParseError("P2 focal length must be positive");
  if (std::abs((*p3)[0] - fu) > 1e-6 * fu) {
    throw ParseError("P2 and P3 focal lengths differ", p3_line);
  }
  // P[0,3] = -fu * (camera x offset from the reference camera)
  const double baseline = ((*p2)[3] - (*p3)[3]) / fu;
  if (!(baseline > 0.0)) {
    throw ParseError("stereo baseline must be positive", p3_line);
  }
  return {*p2, *p3, CameraRig(fu, (*p2)[5], (*p2)[2], (*p2)[6], baseline)};
}

CalibBundle calib_from_rig(const CameraRig& rig) {
  Matrix34 p2{rig.fu(), 0.0, rig.cu(), 0.0, 0.0, rig.fv(), rig.cv(), 0.0, 0.0, 0.0, 1.0, 0.0};
  Matrix34 p3 = p2;
  p3[3] = -rig.focal_baseline();
  return {p2, p3, rig};
}

std::string write_calib(const CalibBundle& calib) {
  Matrix34 p0 = calib.p2;
  p0[3] = 0.0;
  p0[7] = 0.0;
  p0[11] = 0.0;
  const std::array<double, 9> identity3{1, 0, 0, 0, 1, 0, 0, 0, 1};
  const Matrix34 identity34{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
  std::string out;
  append_matrix(out, "P0", p0);
  append_matrix(out, "P1", p0);
  append_matrix(out, "P2", calib.p2);
  append_matrix(out, "P3", calib.p3);
  append_matrix(out, "R0_rect", identity3);
  append_matrix(out, "Tr_velo_to_cam", identity34);
  append_matrix(out, "Tr_imu_to_velo", identity34);
  return out;
}

std::vector<ObjectRecord> parse_labels(std::string_view text) {
  std::vector<ObjectRecord> records;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto f = split_fields(line);
    if (f.empty()) return;
    if (f.size() != 15 && f.size() != 16) {
      throw ParseError("expected 15 or 16 fields, got " + std::to_string(f.size()), line_no);
    }
    ObjectRecord r;
    r.type = std::string(f[0]);
    r.truncated = parse_double(f[1], line_no);
    r.occluded = parse_int(f[2], line_no);
    r.alpha = parse_double(f[3], line_no);
    r.bbox = {parse_double(f[4], line_no), parse_double(f[5], line_no),
              parse_double(f[6], line_no), parse_double(f[7], line_no)};
    r.h = parse_double(f[8], line_no);
    r.w = parse_double(f[9], line_no);
    r.l = parse_double(f[10], line_no);
    r.x = parse_double(f[11], line_no);
    r.y = parse_double(f[12], line_no);
    r.z = parse_double(f[13], line_no);
    r.rotation_y = parse_double(f[14], line_no);
    if (f.size() == 16) r.score = parse_double(f[15], line_no);
    records.push_back(std::move(r));
  });
  return records;
}

std::string write_labels(const std::vector<ObjectRecord>& records) {
  std::string out;
  for (const ObjectRecord& r : records) {
    out += r.type;
    out += ' ' + format_float(r.truncated);
    out += ' ' + std::to_string(r.occluded);
    for (double v : {r.alpha, r.bbox.u1, r.bbox.v1, r.bbox.u2, r.bbox.v2, r.h, r.w, r.l, r.x,
                     r.y, r.z, r.rotation_y}) {
      out += ' ' + format_float(v);
    }
    if (r.score) out += ' ' + format_float(*r.score);
    out += '\n';
  }
  return out;
}

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Moderate: return "moderate";
    case Difficulty::Hard: return "hard";
    case Difficulty::Ignored: return "ignored";
  }
  return "ignored";
}

bool meets_difficulty(const ObjectRecord& rec, Difficulty bucket, const DifficultyThresholds& t) {
  if (bucket == Difficulty::Ignored) return false;
  const auto k = static_cast<std::size_t>(bucket);
  return rec.bbox.height() >= t.min_height[k] && rec.occluded <= t.max_occlusion[k] &&
         rec.truncated <= t.max_truncation[k];
}

Difficulty difficulty_of(const ObjectRecord& rec, const DifficultyThresholds& t) {
  for (Difficulty d : {Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard}) {
    if (meets_difficulty(rec, d, t)) return d;
  }
  return Difficulty::Ignored;
}

Box3D box_from_record(const ObjectRecord& rec) {
  return {rec.x, rec.y - 0.5 * rec.h, rec.z, rec.w, rec.h, rec.l,
          wrap_angle(rec.rotation_y + 0.5 * kPi)};
}

void set_record_box(ObjectRecord& rec, const Box3D& box) {
  rec.x = box.x;
  rec.y = box.y + 0.5 * box.h;
  rec.z = box.z;
  rec.w = box.w;
  rec.h = box.h;
  rec.l = box.l;
  rec.rotation_y = wrap_angle(box.theta - 0.5 * kPi);
}

double record_alpha_from_allocentric(double alpha) { return wrap_angle(alpha - 0.5 * kPi); }

double allocentric_from_record_alpha(double alpha) { return wrap_angle(alpha + 0.5 * kPi); }

std::string frame_filename(std::size_t frame, std::string_view extension) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", frame);
  return std::string(buf) + std::string(extension);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::size_t> list_frames(const std::filesystem::path& dir) {
  std::vector<std::size_t> frames;
  if (!std::filesystem::is_directory(dir)) return frames;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](char c) {
          return c >= '0' && c <= '9';
        })) {
      continue;
    }
    frames.push_back(static_cast<std::size_t>(std::stoull(stem)));
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

}  // namespace stereo3d
