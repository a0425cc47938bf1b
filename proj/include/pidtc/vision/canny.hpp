#pragma once

#include <vector>

#include "pidtc/vision/filter.hpp"

namespace pidtc::vision {

// Thin edges by keeping only local maxima along the quantized gradient
// direction (0, 45, 90, 135 degrees). The forward-neighbor comparison is
// non-strict and the backward one strict, so a two-pixel plateau keeps
// exactly one pixel. Border pixels are suppressed.
inline GrayImage non_max_suppression(const GrayImage& magnitude,
                                     const std::vector<double>& direction) {
  if (direction.size() != magnitude.pixels.size()) {
    throw ContractError("non_max_suppression: direction/magnitude size mismatch");
  }
  GrayImage out(magnitude.width, magnitude.height);
  const int w = magnitude.width, h = magnitude.height;
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const std::size_t idx =
          static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      const double m = magnitude.pixels[idx];
      if (m == 0.0) continue;
      const double theta = direction[idx];  // (-pi/2, pi/2]
      int dx = 1, dy = 0;                   // bin 0: horizontal gradient
      if (theta >= 3.0 * kPi / 8.0) {
        dx = 0;
        dy = 1;  // bin 90
      } else if (theta >= kPi / 8.0) {
        dx = 1;
        dy = 1;  // bin 45
      } else if (theta <= -kPi / 8.0) {
        dx = 1;
        dy = -1;  // bin 135
      }
      const double forward = magnitude.at(x + dx, y + dy);
      const double backward = magnitude.at(x - dx, y - dy);
      if (m >= forward && m > backward) out.at(x, y) = m;
    }
  }
  return out;
}

// Double-threshold hysteresis: strong pixels (>= high) seed an 8-connected
// flood across weak pixels (>= low). Output is a 0/1 edge map.
inline GrayImage hysteresis_threshold(const GrayImage& suppressed, double low, double high) {
  if (low < 0.0 || high < low) {
    throw ParameterError("hysteresis_threshold: need 0 <= low <= high, got low " +
                         std::to_string(low) + ", high " + std::to_string(high));
  }
  const int w = suppressed.width, h = suppressed.height;
  GrayImage out(w, h);
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (suppressed.at(x, y) >= high && out.at(x, y) == 0.0) {
        out.at(x, y) = 1.0;
        stack.emplace_back(x, y);
        while (!stack.empty()) {
          const auto [cx, cy] = stack.back();
          stack.pop_back();
          for (int ny = cy - 1; ny <= cy + 1; ++ny) {
            for (int nx = cx - 1; nx <= cx + 1; ++nx) {
              if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
              if (out.at(nx, ny) != 0.0) continue;
              if (suppressed.at(nx, ny) >= low) {
                out.at(nx, ny) = 1.0;
                stack.emplace_back(nx, ny);
              }
            }
          }
        }
      }
    }
  }
  return out;
}

struct CannyParams {
  int kernel_size = 5;
  double sigma = 1.4;
  double low = 50.0;
  double high = 150.0;
};

inline GrayImage canny_edges(const GrayImage& img, const CannyParams& p = {}) {
  const GrayImage blurred = gaussian_blur(img, p.kernel_size, p.sigma);
  const GradientField grad = sobel_gradients(blurred);
  const GrayImage thin = non_max_suppression(grad.magnitude, grad.direction);
  return hysteresis_threshold(thin, p.low, p.high);
}

}  // namespace pidtc::vision
