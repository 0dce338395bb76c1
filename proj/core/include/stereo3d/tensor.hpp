#pragma once

// Dense row-major tensors and the binary dump format used for fixtures:
//
//   shape: d0 d1 ... dk\n
//   <prod(d) little-endian float32 values, row-major>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace stereo3d {

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  std::span<const std::size_t> shape() const { return shape_; }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// (C, H, W) feature grid. Cell (y, x) covers [x, x + 1) x [y, y + 1) in
/// feature coordinates, so its center is (x + 0.5, y + 0.5).
class FeatureMap {
 public:
  FeatureMap(std::size_t channels, std::size_t height, std::size_t width,
             double fill = 0.0);
  /// Throws ArgumentError if the tensor is not rank 3 or has an empty axis.
  explicit FeatureMap(Tensor tensor);

  std::size_t channels() const { return tensor_.dim(0); }
  std::size_t height() const { return tensor_.dim(1); }
  std::size_t width() const { return tensor_.dim(2); }

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return tensor_[(c * height() + y) * width() + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return tensor_[(c * height() + y) * width() + x];
  }

  /// Bilinear sample of channel c at continuous feature coordinates, with the
  /// sample point clamped to the outermost cell centers.
  double sample(std::size_t c, double fx, double fy) const;

  const Tensor& tensor() const { return tensor_; }
  Tensor& tensor() { return tensor_; }

  bool operator==(const FeatureMap&) const = default;

 private:
  Tensor tensor_;
};

void write_tensor(std::ostream& out, const Tensor& tensor);
Tensor read_tensor(std::istream& in);
void write_tensor_file(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_tensor_file(const std::filesystem::path& path);

}  // namespace stereo3d
