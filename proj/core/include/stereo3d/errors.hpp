#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stereo3d {

// Non-physical numeric input (non-positive depth, disparity, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Precondition on an argument violated (empty RoI, bad grid bounds, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A projected corner lies on or behind the camera plane.
class BehindCameraError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Left/right box centers coincide or are swapped.
class DegenerateStereoError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Angle decode from a zero-length (sin, cos) vector.
class DegenerateAngleError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Left/right boxes are not vertically aligned.
class RectificationError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

// Dense alignment found no candidate depth with in-image samples.
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text or binary format error. line() is 1-based; 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace stereo3d
