#pragma once

#include <cmath>
#include <vector>

#include "pidtc/geometry.hpp"
#include "pidtc/vision/image.hpp"

namespace pidtc::vision {

// Sampled 2-D Gaussian (1/(2*pi*sigma^2)) * exp(-(x^2+y^2)/(2*sigma^2)),
// renormalized so the finite window sums to exactly 1.
inline std::vector<double> gaussian_kernel(int size, double sigma) {
  if (size < 1 || size % 2 == 0) {
    throw ParameterError("gaussian_kernel: size must be odd and positive, got " +
                         std::to_string(size));
  }
  if (!(sigma > 0.0)) {
    throw ParameterError("gaussian_kernel: sigma must be positive, got " + std::to_string(sigma));
  }
  std::vector<double> k(static_cast<std::size_t>(size) * static_cast<std::size_t>(size));
  const int c = size / 2;
  const double norm = 1.0 / (2.0 * kPi * sigma * sigma);
  double sum = 0.0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double dx = x - c, dy = y - c;
      const double v = norm * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      k[static_cast<std::size_t>(y) * static_cast<std::size_t>(size) + static_cast<std::size_t>(x)] = v;
      sum += v;
    }
  }
  for (double& v : k) v /= sum;
  return k;
}

// Cross-correlation with an odd square kernel, replicate borders, same extent.
inline GrayImage convolve(const GrayImage& img, const std::vector<double>& kernel, int size) {
  if (size < 1 || size % 2 == 0 ||
      kernel.size() != static_cast<std::size_t>(size) * static_cast<std::size_t>(size)) {
    throw ParameterError("convolve: kernel must be odd square, got size " + std::to_string(size) +
                         " with " + std::to_string(kernel.size()) + " taps");
  }
  if (size > img.width || size > img.height) {
    throw ParameterError("convolve: kernel " + std::to_string(size) + "x" + std::to_string(size) +
                         " larger than image " + std::to_string(img.width) + "x" +
                         std::to_string(img.height));
  }
  GrayImage out(img.width, img.height);
  const int c = size / 2;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < size; ++ky) {
        for (int kx = 0; kx < size; ++kx) {
          acc += kernel[static_cast<std::size_t>(ky) * static_cast<std::size_t>(size) +
                        static_cast<std::size_t>(kx)] *
                 img.at_clamped(x + kx - c, y + ky - c);
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

inline GrayImage gaussian_blur(const GrayImage& img, int size = 5, double sigma = 1.4) {
  return convolve(img, gaussian_kernel(size, sigma), size);
}

// Gradient field from the standard 3x3 Sobel pair.
struct GradientField {
  GrayImage gx;
  GrayImage gy;
  GrayImage magnitude;
  std::vector<double> direction;  // atan(gy/gx), range (-pi/2, pi/2]
};

inline GradientField sobel_gradients(const GrayImage& img) {
  static const std::vector<double> sx = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
  static const std::vector<double> sy = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
  GradientField f;
  f.gx = convolve(img, sx, 3);
  f.gy = convolve(img, sy, 3);
  f.magnitude = GrayImage(img.width, img.height);
  f.direction.assign(f.magnitude.pixels.size(), 0.0);
  for (std::size_t i = 0; i < f.magnitude.pixels.size(); ++i) {
    const double gx = f.gx.pixels[i];
    const double gy = f.gy.pixels[i];
    f.magnitude.pixels[i] = std::sqrt(gx * gx + gy * gy);
    f.direction[i] = gx == 0.0 ? kPi / 2.0 : std::atan(gy / gx);
  }
  return f;
}

}  // namespace pidtc::vision
