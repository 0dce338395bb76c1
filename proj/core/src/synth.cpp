#include "stereo3d/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rng.hpp"
#include "stereo3d/errors.hpp"
#include "stereo3d/eval.hpp"

namespace stereo3d {
namespace {

using detail::mix_seed;
using detail::Rng;

double hash01(std::uint64_t seed, long long ix, long long iy) {
  const std::uint64_t h =
      mix_seed(mix_seed(seed, static_cast<std::uint64_t>(ix)), static_cast<std::uint64_t>(iy));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double texel(const SyntheticObject& obj, TextureKind kind, long long ix, long long iy) {
  const double span = obj.texture_hi - obj.texture_lo;
  const double r = hash01(obj.texture_seed, ix, iy);
  if (kind == TextureKind::Noise) return obj.texture_lo + span * r;
  // Checker cells carry a small per-cell jitter so the pattern is not
  // periodic, which would give the photometric search aliased minima.
  const double base = ((ix + iy) & 1) != 0 ? obj.texture_hi : obj.texture_lo;
  return base + (r - 0.5) * 0.2 * span;
}

PixelBox to_pixels(const Measurements5& m, const CameraRig& rig) { return m.to_pixel_box(rig); }

bool inside_image(const PixelBox& b, const SceneSpec& spec) {
  const double m = spec.border_margin;
  return b.u1 >= m && b.v1 >= m && b.u2 <= spec.image_width - 1 - m &&
         b.v2 <= spec.image_height - 1 - m;
}

bool overlaps(const PixelBox& a, const PixelBox& b) {
  return a.u1 < b.u2 && b.u1 < a.u2 && a.v1 < b.v2 && b.v1 < a.v2;
}

// Both footprints of an object, padded by the border margin.
PixelBox padded_extent(const StereoBoxPair& boxes, double pad) {
  return {std::min(boxes.left.u1, boxes.right.u1) - pad,
          std::min(boxes.left.v1, boxes.right.v1) - pad,
          std::max(boxes.left.u2, boxes.right.u2) + pad,
          std::max(boxes.left.v2, boxes.right.v2) + pad};
}

void check_range(const Range& r, const char* name) {
  if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw ArgumentError(std::string("scene spec range '") + name + "' is empty");
  }
}

struct ColumnSpan {
  long long first;
  long long last;
};

ColumnSpan columns(double u1, double u2) {
  return {static_cast<long long>(std::ceil(u1)), static_cast<long long>(std::floor(u2))};
}

}  // namespace

std::string_view to_string(TextureKind kind) {
  return kind == TextureKind::Checker ? "checker" : "noise";
}

TextureKind texture_from_string(std::string_view text) {
  if (text == "checker") return TextureKind::Checker;
  if (text == "noise") return TextureKind::Noise;
  throw ArgumentError("unknown texture kind '" + std::string(text) + "'");
}

void SceneSpec::validate() const {
  if (n_objects < 0) throw ArgumentError("scene spec n_objects must be >= 0");
  check_range(depth, "depth");
  check_range(lateral, "lateral");
  check_range(width, "width");
  check_range(height, "height");
  check_range(length, "length");
  check_range(yaw, "yaw");
  if (depth.lo <= 0.0) throw ArgumentError("scene spec depth range must be positive");
  if (width.lo <= 0.0 || height.lo <= 0.0 || length.lo <= 0.0) {
    throw ArgumentError("scene spec dimensions must be positive");
  }
  if (n_objects > 0 && (depth.lo == depth.hi || lateral.lo == lateral.hi)) {
    throw ArgumentError("scene spec placement region has zero volume");
  }
  if (image_width < 16 || image_height < 16) throw ArgumentError("scene image too small");
  if (!(texture_scale > 0.0)) throw ArgumentError("texture scale must be positive");
  if (!(occlusion_low >= 0.0 && occlusion_low <= occlusion_high && occlusion_high <= 1.0)) {
    throw ArgumentError("occlusion thresholds must satisfy 0 <= low <= high <= 1");
  }
  if (max_attempts < 1) throw ArgumentError("max_attempts must be >= 1");
}

VisibleRange SyntheticObject::visible_range(const CameraRig& rig) const {
  if (!has_visible_range) return {0.0, 0.0, occlusion_level};
  return {normalize_u(visible_u1, rig), normalize_u(visible_u2, rig), occlusion_level};
}

double texture_value(const SyntheticObject& obj, TextureKind kind, double scale, double s,
                     double t) {
  const double gx = s / scale;
  const double gy = t / scale;
  const double fx = std::floor(gx);
  const double fy = std::floor(gy);
  const auto ix = static_cast<long long>(fx);
  const auto iy = static_cast<long long>(fy);
  const double ax = gx - fx;
  const double ay = gy - fy;
  const double top = (1.0 - ax) * texel(obj, kind, ix, iy) + ax * texel(obj, kind, ix + 1, iy);
  const double bottom =
      (1.0 - ax) * texel(obj, kind, ix, iy + 1) + ax * texel(obj, kind, ix + 1, iy + 1);
  return (1.0 - ay) * top + ay * bottom;
}

StereoRender render_stereo(const SyntheticScene& scene) {
  const SceneSpec& spec = scene.spec;
  const auto W = static_cast<std::size_t>(spec.image_width);
  const auto H = static_cast<std::size_t>(spec.image_height);
  StereoRender out{GrayImage(W, H, spec.background), GrayImage(W, H, spec.background),
                   std::vector<int>(W * H, -1), std::vector<int>(W * H, -1)};

  for (std::size_t k = scene.objects.size(); k-- > 0;) {
    const SyntheticObject& obj = scene.objects[k];
    const PixelBox& b = obj.boxes.left;
    const auto rows = columns(b.v1, b.v2);
    for (long long i = std::max(0LL, rows.first);
         i <= std::min<long long>(static_cast<long long>(H) - 1, rows.last); ++i) {
      const double t = static_cast<double>(i) - b.v1;
      for (int view = 0; view < 2; ++view) {
        const double shift = view == 0 ? 0.0 : obj.disparity;
        const auto cols = columns(b.u1 - shift, b.u2 - shift);
        GrayImage& img = view == 0 ? out.left : out.right;
        std::vector<int>& owner = view == 0 ? out.left_owner : out.right_owner;
        for (long long j = std::max(0LL, cols.first);
             j <= std::min<long long>(static_cast<long long>(W) - 1, cols.last); ++j) {
          const double s = static_cast<double>(j) + shift - b.u1;
          img.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
              texture_value(obj, spec.texture, spec.texture_scale, s, t);
          owner[static_cast<std::size_t>(i) * W + static_cast<std::size_t>(j)] =
              static_cast<int>(k);
        }
      }
    }
  }
  return out;
}

SyntheticScene generate_scene(const SceneSpec& spec, const CameraRig& rig) {
  spec.validate();
  SyntheticScene scene{spec, rig, {}, {}, {}, {}, {}};
  Rng rng(mix_seed(spec.seed, 0x5eedULL));

  std::vector<PixelBox> extents;
  for (int n = 0; n < spec.n_objects; ++n) {
    for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
      Box3D box;
      box.z = rng.uniform(spec.depth.lo, spec.depth.hi);
      box.x = rng.uniform(spec.lateral.lo, spec.lateral.hi);
      box.w = rng.uniform(spec.width.lo, spec.width.hi);
      box.h = rng.uniform(spec.height.lo, spec.height.hi);
      box.l = rng.uniform(spec.length.lo, spec.length.hi);
      box.theta = wrap_angle(rng.uniform(spec.yaw.lo, spec.yaw.hi));
      box.y = spec.camera_height - 0.5 * box.h;
      const std::uint64_t texture_seed = rng.next();
      const double lo = rng.uniform(0.40, 0.55);
      const double hi = lo + rng.uniform(0.30, 0.42);

      bool ok = true;
      for (const SyntheticObject& other : scene.objects) {
        BevBox padded = bev_from_box(box);
        padded.w += 0.5;
        padded.l += 0.5;
        if (bev_intersection_area(padded, bev_from_box(other.box)) > 0.0) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;

      StereoBoxPair boxes;
      try {
        for (CornerType c : {CornerType::FrontLeft, CornerType::FrontRight, CornerType::BackLeft,
                             CornerType::BackRight}) {
          if (!(corner_xz(box, c).second > 0.5)) throw BehindCameraError("corner too close");
        }
        Box3D right_box = box;
        right_box.x -= rig.baseline();
        boxes.left = to_pixels(project_box(box), rig);
        boxes.right = to_pixels(project_box(right_box), rig);
      } catch (const DomainError&) {
        continue;
      }
      if (!boxes.left.valid() || !boxes.right.valid() ||
          boxes.left.width() < spec.min_box_width || !inside_image(boxes.left, spec) ||
          !inside_image(boxes.right, spec)) {
        continue;
      }

      const double disparity = disparity_from_depth(box.z, rig);
      // The rendered right footprint is the left one shifted by the center
      // disparity; keep it inside the image too.
      PixelBox rendered = boxes.left;
      rendered.u1 -= disparity;
      rendered.u2 -= disparity;
      if (!inside_image(rendered, spec)) continue;

      const PixelBox extent = padded_extent({boxes.left, rendered}, spec.border_margin);
      if (!spec.allow_occlusion &&
          std::any_of(extents.begin(), extents.end(),
                      [&](const PixelBox& e) { return overlaps(e, extent); })) {
        continue;
      }

      SyntheticObject obj;
      obj.box = box;
      obj.boxes = boxes;
      obj.disparity = disparity;
      obj.alpha = allocentric_from_egocentric(box.theta, box.x, box.z);
      obj.texture_seed = texture_seed;
      obj.texture_lo = lo;
      obj.texture_hi = hi;
      obj.keypoint = CornerType::BackRight;
      for (CornerType c : {CornerType::BackRight, CornerType::FrontLeft}) {
        const auto [cx, cz] = corner_xz(box, c);
        const double u = rig.fu() * cx / cz + rig.cu();
        if (u > boxes.left.u1 && u < boxes.left.u2) {
          obj.keypoint = c;
          break;
        }
      }
      obj.keypoint_u = pixel_u(project_box(box, obj.keypoint).u_p, rig);
      scene.objects.push_back(obj);
      extents.push_back(extent);
      break;
    }
  }

  std::stable_sort(scene.objects.begin(), scene.objects.end(),
                   [](const SyntheticObject& a, const SyntheticObject& b) {
                     return a.box.z < b.box.z;
                   });

  StereoRender render = render_stereo(scene);
  const auto W = static_cast<std::size_t>(spec.image_width);
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    SyntheticObject& obj = scene.objects[k];
    const PixelBox& b = obj.boxes.left;
    const auto rows = columns(b.v1, b.v2);
    const auto cols = columns(b.u1, b.u2);
    std::size_t total = 0;
    std::size_t owned = 0;
    long long run_start = 0;
    long long best_start = 0;
    long long best_len = 0;
    long long run_len = 0;
    for (long long j = cols.first; j <= cols.last; ++j) {
      bool column_visible = true;
      // Both right-image neighbours of the sample at j - d must show this object.
      const double ur = static_cast<double>(j) - obj.disparity;
      const auto jr0 = static_cast<long long>(std::floor(ur));
      const auto jr1 = static_cast<long long>(std::ceil(ur));
      for (long long i = rows.first; i <= rows.last; ++i) {
        ++total;
        const std::size_t row = static_cast<std::size_t>(i) * W;
        const bool mine = render.left_owner[row + static_cast<std::size_t>(j)] ==
                          static_cast<int>(k);
        if (mine) ++owned;
        auto right_owned = [&](long long jr) {
          return jr >= 0 && jr < spec.image_width &&
                 render.right_owner[row + static_cast<std::size_t>(jr)] == static_cast<int>(k);
        };
        const bool right_mine = right_owned(jr0) && right_owned(jr1);
        column_visible = column_visible && mine && right_mine;
      }
      if (column_visible) {
        if (run_len == 0) run_start = j;
        ++run_len;
        if (run_len > best_len) {
          best_len = run_len;
          best_start = run_start;
        }
      } else {
        run_len = 0;
      }
    }
    obj.occluded_fraction =
        total == 0 ? 0.0 : 1.0 - static_cast<double>(owned) / static_cast<double>(total);
    obj.occlusion_level = obj.occluded_fraction < spec.occlusion_low    ? 0
                          : obj.occluded_fraction < spec.occlusion_high ? 1
                                                                        : 2;
    obj.has_visible_range = best_len >= 2;
    if (obj.has_visible_range) {
      obj.visible_u1 = static_cast<double>(best_start);
      obj.visible_u2 = static_cast<double>(best_start + best_len - 1);
    }
  }
  scene.left = std::move(render.left);
  scene.right = std::move(render.right);
  scene.left_owner = std::move(render.left_owner);
  scene.right_owner = std::move(render.right_owner);
  return scene;
}

Roi feature_roi(const PixelBox& box, int downsample, double margin) {
  const double f = 1.0 / static_cast<double>(downsample);
  return {to_feature_coord(box.u1, f) - margin, to_feature_coord(box.v1, f) - margin,
          to_feature_coord(box.u2, f) + margin, to_feature_coord(box.v2, f) + margin};
}

OracleFeatures oracle_features(const SyntheticScene& scene, const DepthGrid& grid,
                               const OracleOptions& options) {
  if (options.channels < 1 || options.downsample < 1) {
    throw ArgumentError("oracle features need >= 1 channel and stride >= 1");
  }
  const std::size_t C = options.channels;
  const int R = options.downsample;
  const auto Hf = static_cast<std::size_t>((scene.spec.image_height + R - 1) / R);
  const auto Wf = static_cast<std::size_t>((scene.spec.image_width + R - 1) / R);
  const double factor = 1.0 / static_cast<double>(R);
  const CameraRig frig = scene.rig.scaled(factor);

  Rng rng(mix_seed(options.seed, mix_seed(scene.spec.seed, 0xfea7ULL)));
  auto unit_vector = [&](std::vector<double>& v) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& x : v) {
        x = rng.normal();
        norm += x * x;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  };

  OracleFeatures out{FeatureMap(C, Hf, Wf), FeatureMap(C, Hf, Wf), {}};
  std::vector<double> v(C);
  for (FeatureMap* fm : {&out.left, &out.right}) {
    for (std::size_t y = 0; y < Hf; ++y) {
      for (std::size_t x = 0; x < Wf; ++x) {
        unit_vector(v);
        for (std::size_t c = 0; c < C; ++c) fm->at(c, y, x) = v[c];
      }
    }
  }

  const std::size_t n = scene.objects.size();
  out.objects.resize(n);
  std::vector<std::vector<double>> codes(n, std::vector<double>(C));
  for (std::size_t k = 0; k < n; ++k) {
    const SyntheticObject& obj = scene.objects[k];
    if (obj.box.z < grid.z_min() || obj.box.z > grid.z_max()) {
      throw ArgumentError("object depth " + std::to_string(obj.box.z) +
                          " lies outside the depth grid");
    }
    unit_vector(codes[k]);
    OracleObject& o = out.objects[k];
    o.true_level = grid.nearest_level(obj.box.z);
    o.disparity = disparity_from_depth(grid[o.true_level], frig);

    // Anchor the RoI so that at the true level the right window's samples
    // fall exactly on cell centers.
    const Roi loose = feature_roi(obj.boxes.left, R, options.roi_margin);
    const double x0 = o.disparity + std::floor(loose.x0 - o.disparity);
    const double y0 = std::floor(loose.y0);
    o.out_w = static_cast<std::size_t>(std::ceil(loose.x1 - x0));
    o.out_h = static_cast<std::size_t>(std::ceil(loose.y1 - y0));
    o.roi = {x0, y0, x0 + static_cast<double>(o.out_w), y0 + static_cast<double>(o.out_h)};
  }

  std::vector<Roi> footprints(n);
  for (std::size_t k = 0; k < n; ++k) footprints[k] = feature_roi(scene.objects[k].boxes.left, R, 0.0);
  auto inside = [&](std::size_t k, double cx, double cy) {
    const Roi& fp = footprints[k];
    return cx >= fp.x0 && cx <= fp.x1 && cy >= fp.y0 && cy <= fp.y1;
  };
  const FeatureMap background = out.left;

  // Left footprints, far to near.
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t y = 0; y < Hf; ++y) {
      for (std::size_t x = 0; x < Wf; ++x) {
        if (!inside(k, static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5)) continue;
        for (std::size_t c = 0; c < C; ++c) out.left.at(c, y, x) = codes[k][c];
      }
    }
  }

  // Right view, far to near. Each object's layer (its code over the left
  // background) is resampled at its disparity and composited by coverage, so
  // a nearer object hides a farther one where their shifted footprints meet
  // and blends with it in the cells they share. Cells of an RoI
  // neighbourhood that no object covers get the shifted left map as matching
  // context.
  std::vector<int> right_owner(Hf * Wf, -1);
  const auto last_col = static_cast<long long>(Wf) - 1;
  for (std::size_t k = n; k-- > 0;) {
    const OracleObject& o = out.objects[k];
    const double d = o.disparity;
    const auto first_x = static_cast<long long>(std::llround(o.roi.x0 - d)) - 1;
    const auto last_x = static_cast<long long>(std::llround(o.roi.x1 - d));
    const auto first_y = static_cast<long long>(o.roi.y0) - 1;
    const auto last_y = static_cast<long long>(o.roi.y1);
    for (long long y = std::max(0LL, first_y);
         y <= std::min<long long>(static_cast<long long>(Hf) - 1, last_y); ++y) {
      const auto yy = static_cast<std::size_t>(y);
      const double cy = static_cast<double>(y) + 0.5;
      for (long long x = std::max(0LL, first_x); x <= std::min(last_col, last_x); ++x) {
        const auto xx = static_cast<std::size_t>(x);
        const double px = static_cast<double>(x) + 0.5 + d;
        const long long xa = static_cast<long long>(std::floor(px - 0.5));
        const double t = px - 0.5 - static_cast<double>(xa);
        const auto ua = static_cast<std::size_t>(std::clamp(xa, 0LL, last_col));
        const auto ub = static_cast<std::size_t>(std::clamp(xa + 1, 0LL, last_col));
        const bool in_a = inside(k, static_cast<double>(ua) + 0.5, cy);
        const bool in_b = inside(k, static_cast<double>(ub) + 0.5, cy);
        const double wa = in_a ? 1.0 - t : 0.0;
        const double wb = in_b ? t : 0.0;
        const double cover = wa + wb;
        int& owner = right_owner[yy * Wf + xx];
        if (cover > 0.0) {
          for (std::size_t c = 0; c < C; ++c) {
            // What shows through the uncovered part: a farther object already
            // painted here, else this layer's own background.
            const double behind =
                owner >= 0 ? (1.0 - cover) * out.right.at(c, yy, xx)
                           : (in_a ? 0.0 : (1.0 - t) * background.at(c, yy, ua)) +
                                 (in_b ? 0.0 : t * background.at(c, yy, ub));
            out.right.at(c, yy, xx) = cover * codes[k][c] + behind;
          }
          owner = static_cast<int>(k);
        } else if (owner < 0) {
          for (std::size_t c = 0; c < C; ++c) out.right.at(c, yy, xx) = out.left.sample(c, px, cy);
        }
      }
    }
  }

  if (options.noise_sigma > 0.0) {
    for (FeatureMap* fm : {&out.left, &out.right}) {
      for (double& x : fm->tensor().data()) x += options.noise_sigma * rng.normal();
    }
  }
  return out;
}

Observation observation_of(const SyntheticObject& obj) {
  Observation o;
  o.type = obj.type;
  o.boxes = obj.boxes;
  o.dims = {obj.box.w, obj.box.h, obj.box.l};
  o.alpha = obj.alpha;
  o.keypoint_u = obj.keypoint_u;
  o.keypoint = obj.keypoint;
  o.visible_u1 = obj.has_visible_range ? obj.visible_u1 : obj.boxes.left.u1;
  o.visible_u2 = obj.has_visible_range ? obj.visible_u2 : obj.boxes.left.u1;
  o.occlusion_level = obj.occlusion_level;
  o.truncated = 0.0;
  o.score = 1.0;
  return o;
}

std::string write_observations(const std::vector<Observation>& obs) {
  std::string out;
  for (const Observation& o : obs) {
    out += o.type;
    for (double v : {o.boxes.left.u1, o.boxes.left.v1, o.boxes.left.u2, o.boxes.left.v2,
                     o.boxes.right.u1, o.boxes.right.v1, o.boxes.right.u2, o.boxes.right.v2,
                     o.dims.w, o.dims.h, o.dims.l, o.alpha, o.keypoint_u}) {
      out += ' ' + format_float(v);
    }
    out += ' ';
    out += to_string(o.keypoint);
    out += ' ' + format_float(o.visible_u1) + ' ' + format_float(o.visible_u2);
    out += ' ' + std::to_string(o.occlusion_level);
    out += ' ' + format_float(o.truncated) + ' ' + format_float(o.score) + '\n';
  }
  return out;
}

std::vector<Observation> parse_observations(std::string_view text) {
  std::vector<Observation> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    std::istringstream ss(line);
    std::vector<std::string> f;
    for (std::string tok; ss >> tok;) f.push_back(tok);
    if (f.empty()) continue;
    if (f.size() != 20) {
      throw ParseError("observation needs 20 fields, got " + std::to_string(f.size()), line_no);
    }
    auto num = [&](std::size_t i) {
      try {
        std::size_t used = 0;
        const double v = std::stod(f[i], &used);
        if (used != f[i].size()) throw std::invalid_argument("trailing");
        return v;
      } catch (const std::exception&) {
        throw ParseError("bad number '" + f[i] + "'", line_no);
      }
    };
    Observation o;
    o.type = f[0];
    o.boxes.left = {num(1), num(2), num(3), num(4)};
    o.boxes.right = {num(5), num(6), num(7), num(8)};
    o.dims = {num(9), num(10), num(11)};
    o.alpha = num(12);
    o.keypoint_u = num(13);
    try {
      o.keypoint = corner_from_string(f[14]);
    } catch (const ArgumentError&) {
      throw ParseError("bad keypoint type '" + f[14] + "'", line_no);
    }
    o.visible_u1 = num(15);
    o.visible_u2 = num(16);
    o.occlusion_level = static_cast<int>(num(17));
    o.truncated = num(18);
    o.score = num(19);
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<ObjectRecord> scene_labels(const SyntheticScene& scene) {
  std::vector<ObjectRecord> records;
  for (const SyntheticObject& obj : scene.objects) {
    ObjectRecord r;
    r.type = obj.type;
    r.truncated = 0.0;
    r.occluded = obj.occlusion_level;
    r.alpha = record_alpha_from_allocentric(obj.alpha);
    r.bbox = obj.boxes.left;
    set_record_box(r, obj.box);
    records.push_back(std::move(r));
  }
  return records;
}

void write_scene_frame(const std::filesystem::path& root, std::size_t frame,
                       const SyntheticScene& scene,
                       const std::optional<OracleFeatures>& features) {
  namespace fs = std::filesystem;
  for (const char* sub : {"calib", "label_2", "image_2", "image_3", "observations"}) {
    fs::create_directories(root / sub);
  }
  write_text_file(root / "calib" / frame_filename(frame, ".txt"),
                  write_calib(calib_from_rig(scene.rig)));
  write_text_file(root / "label_2" / frame_filename(frame, ".txt"),
                  write_labels(scene_labels(scene)));
  write_pgm_file(root / "image_2" / frame_filename(frame, ".pgm"), scene.left, 65535);
  write_pgm_file(root / "image_3" / frame_filename(frame, ".pgm"), scene.right, 65535);
  std::vector<Observation> obs;
  for (const SyntheticObject& obj : scene.objects) obs.push_back(observation_of(obj));
  write_text_file(root / "observations" / frame_filename(frame, ".txt"),
                  write_observations(obs));
  if (features) {
    fs::create_directories(root / "features");
    write_tensor_file(root / "features" / frame_filename(frame, "_left.bin"),
                      features->left.tensor());
    write_tensor_file(root / "features" / frame_filename(frame, "_right.bin"),
                      features->right.tensor());
  }
}

}  // namespace stereo3d
