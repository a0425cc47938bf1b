#pragma once

#include <string>
#include <vector>

#include "pidtc/errors.hpp"

namespace pidtc::vision {

inline constexpr int kMaxImageSide = 4096;

// Row-major grayscale raster; values nominally in [0, 255] but kept as
// doubles so filter outputs stay exact.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GrayImage() = default;

  GrayImage(int w, int h, double fill = 0.0) : width(w), height(h) {
    validate_extent(w, h);
    pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
  }

  double& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }

  double at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }

  // Replicate-border read.
  double at_clamped(int x, int y) const {
    x = x < 0 ? 0 : (x >= width ? width - 1 : x);
    y = y < 0 ? 0 : (y >= height ? height - 1 : y);
    return at(x, y);
  }

  static void validate_extent(int w, int h) {
    if (w <= 0 || h <= 0 || w > kMaxImageSide || h > kMaxImageSide) {
      throw ParameterError("image: extent " + std::to_string(w) + "x" + std::to_string(h) +
                           " outside (0, " + std::to_string(kMaxImageSide) + "]");
    }
  }
};

}  // namespace pidtc::vision
