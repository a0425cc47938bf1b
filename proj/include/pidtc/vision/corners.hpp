#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pidtc/geometry.hpp"
#include "pidtc/vision/canny.hpp"
#include "pidtc/vision/hough.hpp"

namespace pidtc::vision {

// The two visible court corners where the far sideline meets the side
// boundary lines, ordered left to right in the image.
struct PriorPoints {
  Point2 p1;
  Point2 p2;
};

namespace detail {

// Intersection of two normal-form lines; empty when near-parallel.
inline std::optional<Point2> line_intersection(const HoughLine& a, const HoughLine& b) {
  const double c1 = std::cos(a.theta), s1 = std::sin(a.theta);
  const double c2 = std::cos(b.theta), s2 = std::sin(b.theta);
  const double det = c1 * s2 - s1 * c2;
  if (std::abs(det) < 1e-9) return std::nullopt;
  return Point2{(a.rho * s2 - b.rho * s1) / det, (c1 * b.rho - c2 * a.rho) / det};
}

}  // namespace detail

struct CornerParams {
  double horizontal_tol = 30.0 * kPi / 180.0;   // max |theta - pi/2| for the sideline
  double min_flank_angle = 15.0 * kPi / 180.0;  // min angle between flanker and sideline
  double extent_margin = 4.0;                   // px slack when testing in-bounds corners
  double min_corner_separation = 50.0;          // px between the two reported corners
};

// From candidate lines sorted by strength, finds the dominant near-horizontal
// sideline and the two strongest lines crossing it inside the image at
// well-separated points; returns the two crossings ordered by x. The two side
// boundaries can be nearly parallel to each other in the image, so flanker
// distinctness is judged by corner separation rather than line angle. Throws
// ExtractionError when the geometry cannot be recovered.
inline PriorPoints extract_corners(const std::vector<HoughLine>& lines, int width, int height,
                                   const CornerParams& params = {}) {
  if (lines.size() < 3) {
    throw ExtractionError("corner extraction failed: only " + std::to_string(lines.size()) +
                          " merged lines (need at least 3)");
  }
  const HoughLine* sideline = nullptr;
  for (const HoughLine& line : lines) {  // lines are sorted by votes descending
    if (std::abs(line.theta - kPi / 2.0) <= params.horizontal_tol) {
      if (sideline == nullptr || line.votes > sideline->votes) sideline = &line;
    }
  }
  if (sideline == nullptr) {
    throw ExtractionError("corner extraction failed: no near-horizontal sideline among " +
                          std::to_string(lines.size()) + " merged lines");
  }

  std::vector<Point2> corners;
  for (const HoughLine& line : lines) {
    if (&line == sideline) continue;
    if (vision::detail::line_angle_between(line.theta, sideline->theta) < params.min_flank_angle) {
      continue;
    }
    const std::optional<Point2> pt = detail::line_intersection(*sideline, line);
    if (!pt) continue;
    if (pt->x < -params.extent_margin || pt->x > width - 1 + params.extent_margin ||
        pt->y < -params.extent_margin || pt->y > height - 1 + params.extent_margin) {
      continue;
    }
    bool distinct = true;
    for (const Point2& c : corners) {
      if (distance(*pt, c) < params.min_corner_separation) {
        distinct = false;
        break;
      }
    }
    if (!distinct) continue;
    corners.push_back(*pt);
    if (corners.size() == 2) break;
  }
  if (corners.size() < 2) {
    throw ExtractionError("corner extraction failed: only " + std::to_string(corners.size()) +
                          " in-bounds corners from " + std::to_string(lines.size()) +
                          " merged lines");
  }
  if (corners[1].x < corners[0].x ||
      (corners[1].x == corners[0].x && corners[1].y < corners[0].y)) {
    std::swap(corners[0], corners[1]);
  }
  return PriorPoints{corners[0], corners[1]};
}

struct PriorExtractionParams {
  CannyParams canny;
  double rho_res = 1.0;
  double theta_res = kPi / 180.0;
  int min_votes = 80;
  double theta_tol = 5.0 * kPi / 180.0;
  double rho_tol = 10.0;
  double refine_capture = 5.0;  // px window for the least-squares line refit
  CornerParams corner;
};

// Full prior-point pipeline: edge map -> accumulator peaks -> merged lines ->
// per-line least-squares refit against the edge pixels -> sideline corner
// intersections. The refit step supplies the subpixel accuracy the quantized
// accumulator cannot.
inline PriorPoints extract_priors(const GrayImage& img, const PriorExtractionParams& params = {}) {
  const GrayImage edges = canny_edges(img, params.canny);
  const std::vector<HoughLine> raw =
      hough_lines(edges, params.rho_res, params.theta_res, params.min_votes);
  std::vector<HoughLine> merged = merge_lines(raw, params.theta_tol, params.rho_tol);
  for (HoughLine& line : merged) line = refine_line(edges, line, params.refine_capture);
  std::sort(merged.begin(), merged.end(), [](const HoughLine& a, const HoughLine& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    if (a.rho != b.rho) return a.rho < b.rho;
    return a.theta < b.theta;
  });
  return extract_corners(merged, img.width, img.height, params.corner);
}

}  // namespace pidtc::vision
