#pragma once

// Grayscale intensity images in [0, 1] and binary PGM (P5, 8 or 16 bit) I/O.
// Pixel (row, col) is centered on image coordinates (u, v) = (col, row).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace stereo3d {

class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::size_t width, std::size_t height, double fill = 0.0);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  double& at(std::size_t row, std::size_t col) { return pixels_[row * width_ + col]; }
  double at(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }

  /// Bilinear sample at (u, v); nullopt outside [0, width-1] x [0, height-1].
  std::optional<double> sample(double u, double v) const;

  const std::vector<double>& pixels() const { return pixels_; }

  bool operator==(const GrayImage&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> pixels_;
};

/// Quantizes [0, 1] to [0, maxval] (round-to-nearest, clamped). maxval above
/// 255 writes 16-bit big-endian samples.
void write_pgm(std::ostream& out, const GrayImage& image, std::uint16_t maxval = 255);
GrayImage read_pgm(std::istream& in);
void write_pgm_file(const std::filesystem::path& path, const GrayImage& image,
                    std::uint16_t maxval = 255);
GrayImage read_pgm_file(const std::filesystem::path& path);

}  // namespace stereo3d
