#include "stereo3d/costvol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rng.hpp"
#include "stereo3d/errors.hpp"

namespace stereo3d {
namespace {

void relu_inplace(Tensor& t) {
  for (double& v : t.data()) v = std::max(v, 0.0);
}

// (Cin, D, H, W) -> (Cout, D, H, W), zero "same" padding.
Tensor conv3d(const Tensor& in, const Conv3d& conv) {
  const std::size_t cin = in.dim(0), depth = in.dim(1), height = in.dim(2), width = in.dim(3);
  if (cin != conv.in_channels) {
    throw ArgumentError("conv3d expects " + std::to_string(conv.in_channels) +
                        " input channels, got " + std::to_string(cin));
  }
  const std::size_t k = conv.kernel;
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  Tensor out({conv.out_channels, depth, height, width});
  const auto sd = static_cast<std::ptrdiff_t>(depth);
  const auto sh = static_cast<std::ptrdiff_t>(height);
  const auto sw = static_cast<std::ptrdiff_t>(width);
  for (std::size_t o = 0; o < conv.out_channels; ++o) {
    for (std::ptrdiff_t d = 0; d < sd; ++d) {
      for (std::ptrdiff_t y = 0; y < sh; ++y) {
        for (std::ptrdiff_t x = 0; x < sw; ++x) {
          double acc = conv.bias[o];
          for (std::size_t i = 0; i < cin; ++i) {
            const double* w = &conv.weights[(o * cin + i) * k * k * k];
            for (std::size_t kd = 0; kd < k; ++kd) {
              const std::ptrdiff_t dd = d + static_cast<std::ptrdiff_t>(kd) - pad;
              if (dd < 0 || dd >= sd) continue;
              for (std::size_t ky = 0; ky < k; ++ky) {
                const std::ptrdiff_t yy = y + static_cast<std::ptrdiff_t>(ky) - pad;
                if (yy < 0 || yy >= sh) continue;
                const std::size_t row = ((i * depth + static_cast<std::size_t>(dd)) * height +
                                         static_cast<std::size_t>(yy)) * width;
                for (std::size_t kx = 0; kx < k; ++kx) {
                  const std::ptrdiff_t xx = x + static_cast<std::ptrdiff_t>(kx) - pad;
                  if (xx < 0 || xx >= sw) continue;
                  acc += w[(kd * k + ky) * k + kx] * in[row + static_cast<std::size_t>(xx)];
                }
              }
            }
          }
          out[((o * depth + static_cast<std::size_t>(d)) * height + static_cast<std::size_t>(y)) *
                  width + static_cast<std::size_t>(x)] = acc;
        }
      }
    }
  }
  return out;
}

// Max pool over the two trailing spatial axes of (C, D, H, W), ceil mode.
Tensor max_pool_spatial(const Tensor& in, std::size_t factor) {
  const std::size_t channels = in.dim(0), depth = in.dim(1), height = in.dim(2), width = in.dim(3);
  const std::size_t oh = (height + factor - 1) / factor;
  const std::size_t ow = (width + factor - 1) / factor;
  Tensor out({channels, depth, oh, ow}, -std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t d = 0; d < depth; ++d) {
      for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
          double& slot = out[((c * depth + d) * oh + y / factor) * ow + x / factor];
          slot = std::max(slot, in[((c * depth + d) * height + y) * width + x]);
        }
      }
    }
  }
  return out;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void fill_uniform(std::vector<double>& values, detail::Rng& rng, double bound) {
  for (double& v : values) v = rng.uniform(-bound, bound);
}

Conv3d make_conv3d(std::size_t in, std::size_t out, std::size_t k, detail::Rng& rng) {
  Conv3d conv{in, out, k, std::vector<double>(out * in * k * k * k), std::vector<double>(out)};
  const double bound = std::sqrt(6.0 / static_cast<double>(in * k * k * k));
  fill_uniform(conv.weights, rng, bound);
  fill_uniform(conv.bias, rng, 0.1 * bound);
  return conv;
}

}  // namespace

FeatureMap roi_align(const FeatureMap& fm, const Roi& roi, std::size_t out_h,
                     std::size_t out_w) {
  if (!roi.valid()) throw ArgumentError("roi_align requires a non-empty RoI");
  if (out_h == 0 || out_w == 0) throw ArgumentError("roi_align output dims must be >= 1");
  FeatureMap out(fm.channels(), out_h, out_w);
  const double bin_w = roi.width() / static_cast<double>(out_w);
  const double bin_h = roi.height() / static_cast<double>(out_h);
  for (std::size_t c = 0; c < fm.channels(); ++c) {
    for (std::size_t y = 0; y < out_h; ++y) {
      const double fy = roi.y0 + (static_cast<double>(y) + 0.5) * bin_h;
      for (std::size_t x = 0; x < out_w; ++x) {
        const double fx = roi.x0 + (static_cast<double>(x) + 0.5) * bin_w;
        out.at(c, y, x) = fm.sample(c, fx, fy);
      }
    }
  }
  return out;
}

CostVolume::CostVolume(DepthGrid grid, Tensor block, Roi left_roi, Roi right_roi)
    : grid_(std::move(grid)),
      block_(std::move(block)),
      left_roi_(left_roi),
      right_roi_(right_roi) {
  if (block_.rank() != 4 || block_.dim(0) < 2 || block_.dim(0) % 2 != 0 ||
      block_.dim(1) != grid_.size() || block_.dim(2) == 0 || block_.dim(3) == 0) {
    throw ArgumentError("cost volume block must be (2C, n, h, w) with n = grid size");
  }
}

CostVolume build_cost_volume(const FeatureMap& left, const FeatureMap& right,
                             const Roi& left_roi, const Roi& right_roi,
                             const DepthGrid& grid, const CameraRig& rig,
                             std::size_t out_h, std::size_t out_w) {
  if (left.channels() != right.channels()) {
    throw ArgumentError("left and right feature maps differ in channel count");
  }
  const std::size_t c_half = left.channels();
  const std::size_t n = grid.size();
  Tensor block({2 * c_half, n, out_h, out_w});
  const FeatureMap left_patch = roi_align(left, left_roi, out_h, out_w);
  const std::size_t plane = out_h * out_w;
  for (std::size_t i = 0; i < n; ++i) {
    const double shift = disparity_from_depth(grid[i], rig);
    const FeatureMap right_patch = roi_align(right, right_roi.shifted(-shift), out_h, out_w);
    for (std::size_t c = 0; c < c_half; ++c) {
      const auto src_l = left_patch.tensor().data().subspan(c * plane, plane);
      const auto src_r = right_patch.tensor().data().subspan(c * plane, plane);
      std::copy(src_l.begin(), src_l.end(),
                block.data().begin() + static_cast<std::ptrdiff_t>((c * n + i) * plane));
      std::copy(src_r.begin(), src_r.end(),
                block.data().begin() +
                    static_cast<std::ptrdiff_t>(((c + c_half) * n + i) * plane));
    }
  }
  return CostVolume(grid, std::move(block), left_roi, right_roi);
}

std::vector<double> match_scores(const CostVolume& cv) {
  const std::size_t c_half = cv.half_channels();
  const std::size_t n = cv.levels();
  const std::size_t plane = cv.height() * cv.width();
  const auto data = cv.block().data();
  std::vector<double> scores(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0, nl = 0.0, nr = 0.0;
    for (std::size_t c = 0; c < c_half; ++c) {
      const double* l = &data[(c * n + i) * plane];
      const double* r = &data[((c + c_half) * n + i) * plane];
      for (std::size_t k = 0; k < plane; ++k) {
        dot += l[k] * r[k];
        nl += l[k] * l[k];
        nr += r[k] * r[k];
      }
    }
    if (nl > 0.0 && nr > 0.0) {
      scores[i] = std::clamp(dot / (std::sqrt(nl) * std::sqrt(nr)), -1.0, 1.0);
    }
  }
  return scores;
}

CostVolume match_reweight(const CostVolume& cv) {
  const std::vector<double> scores = match_scores(cv);
  CostVolume out = cv;
  const std::size_t n = cv.levels();
  const std::size_t plane = cv.height() * cv.width();
  auto data = out.block().data();
  for (std::size_t c = 0; c < cv.channels(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double* slice = &data[(c * n + i) * plane];
      for (std::size_t k = 0; k < plane; ++k) slice[k] *= scores[i];
    }
  }
  return out;
}

ConvStack ConvStack::random(std::size_t in_channels, std::uint64_t seed,
                            const ConvStackShape& shape) {
  if (in_channels == 0 || shape.hidden == 0 || shape.kernel % 2 == 0) {
    throw ArgumentError("ConvStack needs positive channels and an odd kernel");
  }
  detail::Rng rng(seed);
  ConvStack stack;
  stack.seed = seed;
  const std::size_t k = shape.kernel;
  stack.stage1[0] = make_conv3d(in_channels, shape.hidden, k, rng);
  stack.stage1[1] = make_conv3d(shape.hidden, shape.hidden, k, rng);
  stack.stage2[0] = make_conv3d(shape.hidden, shape.hidden, k, rng);
  stack.stage2[1] = make_conv3d(shape.hidden, shape.hidden, k, rng);
  stack.reduce = make_conv3d(shape.hidden, 1, 1, rng);

  Conv2d& att = stack.attention;
  att.in_channels = in_channels;
  att.out_channels = in_channels;
  att.kernel = k;
  att.weights.resize(in_channels * in_channels * k * k);
  att.bias.resize(in_channels);
  const double bound =
      shape.attention_gain * std::sqrt(6.0 / static_cast<double>(in_channels * k * k));
  fill_uniform(att.weights, rng, bound);
  fill_uniform(att.bias, rng, bound);
  return stack;
}

CostVolume structure_attention(const CostVolume& cv, const Conv2d& kernel) {
  const std::size_t channels = cv.channels();
  if (kernel.in_channels != channels || kernel.out_channels != channels ||
      kernel.kernel % 2 == 0 ||
      kernel.weights.size() != channels * channels * kernel.kernel * kernel.kernel ||
      kernel.bias.size() != channels) {
    throw ArgumentError("attention kernel does not match cost volume channels");
  }
  const std::size_t n = cv.levels(), height = cv.height(), width = cv.width();

  // Mean over the height axis: (2C, n, W) bird's-eye-view plane.
  std::vector<double> bev(channels * n * width, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
          bev[(c * n + i) * width + x] += cv.at(c, i, y, x);
        }
      }
    }
  }
  for (double& v : bev) v /= static_cast<double>(height);

  const std::size_t k = kernel.kernel;
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  const auto sn = static_cast<std::ptrdiff_t>(n);
  const auto sw = static_cast<std::ptrdiff_t>(width);
  std::vector<double> gate(channels * n * width);
  for (std::size_t o = 0; o < channels; ++o) {
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
      for (std::ptrdiff_t x = 0; x < sw; ++x) {
        double acc = kernel.bias[o];
        for (std::size_t c = 0; c < channels; ++c) {
          const double* w = &kernel.weights[(o * channels + c) * k * k];
          for (std::size_t ki = 0; ki < k; ++ki) {
            const std::ptrdiff_t ii = i + static_cast<std::ptrdiff_t>(ki) - pad;
            if (ii < 0 || ii >= sn) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const std::ptrdiff_t xx = x + static_cast<std::ptrdiff_t>(kx) - pad;
              if (xx < 0 || xx >= sw) continue;
              acc += w[ki * k + kx] *
                     bev[(c * n + static_cast<std::size_t>(ii)) * width + static_cast<std::size_t>(xx)];
            }
          }
        }
        gate[(o * n + static_cast<std::size_t>(i)) * width + static_cast<std::size_t>(x)] = sigmoid(acc);
      }
    }
  }

  CostVolume out = cv;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
          const double g = cv.at(c, i, y, x);
          out.at(c, i, y, x) = gate[(c * n + i) * width + x] * g + g;
        }
      }
    }
  }
  return out;
}

DepthPMF::DepthPMF(DepthGrid grid, std::vector<double> p)
    : grid_(std::move(grid)), p_(std::move(p)) {
  if (p_.size() != grid_.size()) throw ArgumentError("DepthPMF size must match its grid");
  double total = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0)) throw ArgumentError("DepthPMF probabilities must be non-negative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ArgumentError("DepthPMF must sum to 1");
}

DepthPMF DepthPMF::from_logits(DepthGrid grid, std::span<const double> logits) {
  return DepthPMF(std::move(grid), softmax(logits));
}

std::size_t DepthPMF::argmax() const {
  return static_cast<std::size_t>(std::max_element(p_.begin(), p_.end()) - p_.begin());
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ArgumentError("softmax of an empty vector");
  const double peak = *std::max_element(logits.begin(), logits.end());
  if (!std::isfinite(peak)) throw ArgumentError("softmax logits must be finite");
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - peak);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> head_logits(const CostVolume& cv, const ConvStack& stack) {
  if (stack.stage1[0].in_channels != cv.channels()) {
    throw ArgumentError("conv stack expects " + std::to_string(stack.stage1[0].in_channels) +
                        " channels, cost volume has " + std::to_string(cv.channels()));
  }
  Tensor x = cv.block();
  for (const Conv3d& conv : stack.stage1) {
    x = conv3d(x, conv);
    relu_inplace(x);
  }
  x = max_pool_spatial(x, 2);
  for (const Conv3d& conv : stack.stage2) {
    x = conv3d(x, conv);
    relu_inplace(x);
  }
  x = max_pool_spatial(x, 4);
  x = conv3d(x, stack.reduce);

  const std::size_t n = x.dim(1);
  const std::size_t plane = x.dim(2) * x.dim(3);
  std::vector<double> logits(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < plane; ++k) logits[i] += x[i * plane + k];
    logits[i] /= static_cast<double>(plane);
  }
  return logits;
}

DepthPMF depth_head(const CostVolume& cv, const ConvStack& stack, const LogitHook& bypass) {
  const std::vector<double> logits = bypass ? bypass(cv) : head_logits(cv, stack);
  if (logits.size() != cv.levels()) {
    throw ArgumentError("depth head produced " + std::to_string(logits.size()) +
                        " logits for " + std::to_string(cv.levels()) + " levels");
  }
  return DepthPMF::from_logits(cv.grid(), logits);
}

std::vector<double> correlation_logits(const CostVolume& cv, double sharpness) {
  const std::size_t c_half = cv.half_channels();
  const std::size_t n = cv.levels();
  const std::size_t plane = cv.height() * cv.width();
  const auto data = cv.block().data();
  std::vector<double> corr(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < c_half; ++c) {
      const double* l = &data[(c * n + i) * plane];
      const double* r = &data[((c + c_half) * n + i) * plane];
      for (std::size_t k = 0; k < plane; ++k) corr[i] += l[k] * r[k];
    }
    corr[i] /= static_cast<double>(c_half * plane);
  }
  const auto [lo, hi] = std::minmax_element(corr.begin(), corr.end());
  const double span = *hi - *lo;
  std::vector<double> logits(n, 0.0);
  if (span > 0.0) {
    for (std::size_t i = 0; i < n; ++i) logits[i] = sharpness * (corr[i] - *hi) / span;
  }
  return logits;
}

double expected_depth(const DepthPMF& pmf) {
  double z = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) z += pmf.grid()[i] * pmf[i];
  return std::clamp(z, pmf.grid().z_min(), pmf.grid().z_max());
}

ExpectedDepthGrad expected_depth_grad(const DepthPMF& pmf) {
  const double z_hat = expected_depth(pmf);
  ExpectedDepthGrad grad;
  grad.d_prob.assign(pmf.grid().levels().begin(), pmf.grid().levels().end());
  grad.d_logit.resize(pmf.size());
  for (std::size_t j = 0; j < pmf.size(); ++j) {
    grad.d_logit[j] = pmf[j] * (pmf.grid()[j] - z_hat);
  }
  return grad;
}

double depth_loss(std::span<const double> pred, std::span<const double> gt) {
  if (pred.empty() || pred.size() != gt.size()) {
    throw ArgumentError("depth_loss needs equal-length, non-empty inputs");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) total += std::abs(gt[k] - pred[k]);
  return total / static_cast<double>(pred.size());
}

}  // namespace stereo3d
