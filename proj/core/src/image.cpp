#include "stereo3d/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "stereo3d/errors.hpp"

namespace stereo3d {

GrayImage::GrayImage(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), pixels_(width * height, fill) {}

std::optional<double> GrayImage::sample(double u, double v) const {
  if (empty()) return std::nullopt;
  const double max_u = static_cast<double>(width_ - 1);
  const double max_v = static_cast<double>(height_ - 1);
  if (!(u >= 0.0 && u <= max_u && v >= 0.0 && v <= max_v)) return std::nullopt;
  const auto c0 = static_cast<std::size_t>(u);
  const auto r0 = static_cast<std::size_t>(v);
  const std::size_t c1 = std::min(c0 + 1, width_ - 1);
  const std::size_t r1 = std::min(r0 + 1, height_ - 1);
  const double tu = u - static_cast<double>(c0);
  const double tv = v - static_cast<double>(r0);
  const double top = (1.0 - tu) * at(r0, c0) + tu * at(r0, c1);
  const double bottom = (1.0 - tu) * at(r1, c0) + tu * at(r1, c1);
  return (1.0 - tv) * top + tv * bottom;
}

void write_pgm(std::ostream& out, const GrayImage& image, std::uint16_t maxval) {
  if (maxval == 0) throw ArgumentError("PGM maxval must be positive");
  out << "P5\n" << image.width() << ' ' << image.height() << '\n' << maxval << '\n';
  const std::size_t bytes = maxval > 255 ? 2 : 1;
  std::string row(image.width() * bytes, '\0');
  for (std::size_t r = 0; r < image.height(); ++r) {
    for (std::size_t c = 0; c < image.width(); ++c) {
      const auto q = static_cast<unsigned>(
          std::lround(std::clamp(image.at(r, c), 0.0, 1.0) * static_cast<double>(maxval)));
      if (bytes == 2) {
        row[2 * c] = static_cast<char>(static_cast<unsigned char>(q >> 8));
        row[2 * c + 1] = static_cast<char>(static_cast<unsigned char>(q & 0xff));
      } else {
        row[c] = static_cast<char>(static_cast<unsigned char>(q));
      }
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw ParseError("failed to write PGM payload");
}

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  int ch = 0;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

std::size_t parse_dim(const std::string& token, const char* what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(token, &pos);
    if (pos != token.size() || v <= 0) throw ParseError("");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError(std::string("bad PGM ") + what + " '" + token + "'");
  }
}

}  // namespace

GrayImage read_pgm(std::istream& in) {
  if (next_token(in) != "P5") throw ParseError("not a binary PGM (P5) image");
  const std::size_t width = parse_dim(next_token(in), "width");
  const std::size_t height = parse_dim(next_token(in), "height");
  const std::size_t maxval = parse_dim(next_token(in), "maxval");
  if (maxval > 65535) throw ParseError("PGM maxval above 65535");
  // Samples wider than one byte are big-endian.
  const std::size_t bytes = maxval > 255 ? 2 : 1;
  GrayImage image(width, height);
  std::string row(width * bytes, '\0');
  for (std::size_t r = 0; r < height; ++r) {
    in.read(row.data(), static_cast<std::streamsize>(row.size()));
    if (static_cast<std::size_t>(in.gcount()) != row.size()) {
      throw ParseError("PGM payload truncated at row " + std::to_string(r));
    }
    for (std::size_t c = 0; c < width; ++c) {
      unsigned q = static_cast<unsigned char>(row[c * bytes]);
      if (bytes == 2) q = (q << 8) | static_cast<unsigned char>(row[2 * c + 1]);
      image.at(r, c) = static_cast<double>(q) / static_cast<double>(maxval);
    }
  }
  return image;
}

void write_pgm_file(const std::filesystem::path& path, const GrayImage& image,
                    std::uint16_t maxval) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path.string() + " for writing");
  write_pgm(out, image, maxval);
}

GrayImage read_pgm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return read_pgm(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace stereo3d
