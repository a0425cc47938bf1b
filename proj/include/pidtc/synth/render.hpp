#pragma once

#include <algorithm>
#include <cmath>

#include "pidtc/rng.hpp"
#include "pidtc/synth/court.hpp"
#include "pidtc/vision/image.hpp"

namespace pidtc::synth {

inline constexpr double kBackgroundLevel = 40.0;
inline constexpr double kLineLevel = 230.0;

namespace detail {

inline double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

}  // namespace detail

// Dark background, bright painted line segments of the given width, optional
// additive Gaussian pixel noise, clipped to [0, 255]. Segments may run out of
// the extent; only the visible part is drawn.
inline vision::GrayImage render_court(const CourtGeometry& geometry, int width, int height,
                                      double line_width, double noise_sd, Rng& rng) {
  if (!(line_width > 0.0)) throw ParameterError("court render: line width must be positive");
  if (noise_sd < 0.0) throw ParameterError("court render: noise sd must be >= 0");
  vision::GrayImage img(width, height, kBackgroundLevel);
  const double radius = line_width / 2.0;
  for (const Segment& seg : geometry.segments_px) {
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(seg.a.x, seg.b.x) - radius - 1.0)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(seg.a.x, seg.b.x) + radius + 1.0)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(seg.a.y, seg.b.y) - radius - 1.0)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(seg.a.y, seg.b.y) + radius + 1.0)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (detail::point_segment_distance(Point2{static_cast<double>(x), static_cast<double>(y)},
                                           seg.a, seg.b) <= radius) {
          img.at(x, y) = kLineLevel;
        }
      }
    }
  }
  if (noise_sd > 0.0) {
    for (double& px : img.pixels) {
      px = std::clamp(px + rng.normal(0.0, noise_sd), 0.0, 255.0);
    }
  }
  return img;
}

}  // namespace pidtc::synth
