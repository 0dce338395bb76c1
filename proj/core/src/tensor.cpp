#include "stereo3d/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "stereo3d/errors.hpp"

namespace stereo3d {
namespace {

std::size_t element_count(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != element_count(shape_)) {
    throw ArgumentError("tensor data size does not match its shape");
  }
}

FeatureMap::FeatureMap(std::size_t channels, std::size_t height, std::size_t width,
                       double fill)
    : tensor_({channels, height, width}, fill) {
  if (channels == 0 || height == 0 || width == 0) {
    throw ArgumentError("feature map dimensions must be >= 1");
  }
}

FeatureMap::FeatureMap(Tensor tensor) : tensor_(std::move(tensor)) {
  if (tensor_.rank() != 3 || tensor_.size() == 0) {
    throw ArgumentError("feature map needs a non-empty rank-3 tensor");
  }
}

double FeatureMap::sample(std::size_t c, double fx, double fy) const {
  // Cell centers at k + 0.5; convert to index space and clamp to the border.
  const double max_x = static_cast<double>(width() - 1);
  const double max_y = static_cast<double>(height() - 1);
  const double ix = std::clamp(fx - 0.5, 0.0, max_x);
  const double iy = std::clamp(fy - 0.5, 0.0, max_y);
  const auto x0 = static_cast<std::size_t>(ix);
  const auto y0 = static_cast<std::size_t>(iy);
  const std::size_t x1 = std::min(x0 + 1, width() - 1);
  const std::size_t y1 = std::min(y0 + 1, height() - 1);
  const double tx = ix - static_cast<double>(x0);
  const double ty = iy - static_cast<double>(y0);
  const double top = (1.0 - tx) * at(c, y0, x0) + tx * at(c, y0, x1);
  const double bottom = (1.0 - tx) * at(c, y1, x0) + tx * at(c, y1, x1);
  return (1.0 - ty) * top + ty * bottom;
}

void write_tensor(std::ostream& out, const Tensor& tensor) {
  out << "shape:";
  for (std::size_t d : tensor.shape()) out << ' ' << d;
  out << '\n';
  std::vector<char> payload(tensor.size() * 4);
  for (std::size_t i = 0; i < tensor.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(tensor[i]));
    for (int b = 0; b < 4; ++b) {
      payload[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
    }
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw ParseError("failed to write tensor payload");
}

Tensor read_tensor(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("missing tensor header", 1);
  std::istringstream fields(header);
  std::string key;
  fields >> key;
  if (key != "shape:") throw ParseError("tensor header must start with 'shape:'", 1);
  std::vector<std::size_t> shape;
  long long d = 0;
  while (fields >> d) {
    if (d < 0) throw ParseError("negative tensor dimension", 1);
    shape.push_back(static_cast<std::size_t>(d));
  }
  if (!fields.eof()) throw ParseError("malformed tensor shape '" + header + "'", 1);
  const std::size_t n = element_count(shape);
  std::vector<char> payload(n * 4);
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
    throw ParseError("tensor payload shorter than its shape requires");
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(payload[i * 4 + b]))
              << (8 * b);
    }
    data[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return Tensor(std::move(shape), std::move(data));
}

void write_tensor_file(const std::filesystem::path& path, const Tensor& tensor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path.string() + " for writing");
  write_tensor(out, tensor);
}

Tensor read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return read_tensor(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace stereo3d
