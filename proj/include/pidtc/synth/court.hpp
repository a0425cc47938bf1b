#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "pidtc/data.hpp"
#include "pidtc/eval/homography.hpp"
#include "pidtc/geometry.hpp"
#include "pidtc/rng.hpp"
#include "pidtc/vision/corners.hpp"

namespace pidtc::synth {

// Fixed per-dataset camera: a ground-plane homography (meters -> pixels)
// composed with a vertical-plane map that lifts the ball by its height.
// Physical frame: x lateral [m], y depth away from the camera [m], z up [m].
struct CameraModel {
  eval::Homography ground_to_image;
  double lift_px_per_m = 55.0;

  Point2 project_ground(double x, double y) const { return ground_to_image.apply({x, y}); }
  Point2 project(const Vec3& p) const {
    const Point2 g = project_ground(p.x, p.y);
    return Point2{g.x, g.y - lift_px_per_m * p.z};
  }
};

struct Segment {
  Point2 a;
  Point2 b;
};

// One record's court: the far sideline and the two side boundary lines, with
// the two prior corners where they meet. Both frames are kept so projection
// consistency is checkable; corners are ordered by ascending pixel x.
struct CourtGeometry {
  std::array<Point2, 2> corners_phys{};
  std::array<Point2, 2> corners_px{};
  std::vector<Segment> segments_px;
  CameraModel camera;

  vision::PriorPoints priors() const { return vision::PriorPoints{corners_px[0], corners_px[1]}; }
};

// Ground-plane scene parameters sampled per record.
struct CourtScene {
  double sideline_depth = 7.0;  // depth of the far sideline at lateral center
  double sideline_tilt = 0.0;   // d(depth)/d(lateral)
  double left_x = 1.0;
  double right_x = 14.0;

  double depth_at(double x) const { return sideline_depth + sideline_tilt * (x - 8.0); }
};

inline constexpr double kSceneCenterX = 8.0;
inline constexpr double kSidelineDepthMin = 5.5;
inline constexpr double kSidelineDepthMax = 8.5;
inline constexpr double kSidelineTiltMax = 0.06;
inline constexpr double kLeftXMin = 0.3;
inline constexpr double kLeftXMax = 1.6;
inline constexpr double kRightXMin = 13.5;
inline constexpr double kRightXMax = 15.2;

// Camera parameter ranges are chosen so every plausible court corner and
// landing region projects inside the 1280x650 extent.
inline CameraModel sample_camera(Rng& rng) {
  const double sx = rng.uniform(70.0, 76.0);    // lateral px per meter
  const double sh = rng.uniform(-2.0, 2.0);     // lateral shear with depth
  const double tx = rng.uniform(30.0, 50.0);
  const double sv = rng.uniform(-1.5, 1.5);     // vertical shear with lateral
  const double sy = rng.uniform(55.0, 65.0);    // vertical px per meter of depth
  const double ty = rng.uniform(740.0, 780.0);
  const double p1 = rng.uniform(-1e-4, 1e-4);   // perspective terms
  const double p2 = rng.uniform(0.002, 0.005);
  CameraModel cam;
  cam.ground_to_image.m = {sx, sh, tx, sv, -sy, ty, p1, p2, 1.0};
  cam.lift_px_per_m = rng.uniform(50.0, 60.0);
  return cam;
}

inline CourtScene sample_scene(Rng& rng) {
  CourtScene s;
  s.sideline_depth = rng.uniform(kSidelineDepthMin, kSidelineDepthMax);
  s.sideline_tilt = rng.uniform(-kSidelineTiltMax, kSidelineTiltMax);
  s.left_x = rng.uniform(kLeftXMin, kLeftXMax);
  s.right_x = rng.uniform(kRightXMin, kRightXMax);
  return s;
}

inline CourtGeometry make_court_geometry(const CourtScene& scene, const CameraModel& camera) {
  CourtGeometry g;
  g.camera = camera;
  g.corners_phys = {Point2{scene.left_x, scene.depth_at(scene.left_x)},
                    Point2{scene.right_x, scene.depth_at(scene.right_x)}};
  for (int i = 0; i < 2; ++i) {
    g.corners_px[static_cast<std::size_t>(i)] = camera.project_ground(
        g.corners_phys[static_cast<std::size_t>(i)].x, g.corners_phys[static_cast<std::size_t>(i)].y);
  }
  if (g.corners_px[1].x < g.corners_px[0].x) {
    std::swap(g.corners_px[0], g.corners_px[1]);
    std::swap(g.corners_phys[0], g.corners_phys[1]);
  }
  // Painted lines: the sideline between the corners, and each side boundary
  // running from its corner toward the camera (the renderer clips to extent).
  g.segments_px.push_back({g.corners_px[0], g.corners_px[1]});
  g.segments_px.push_back({g.corners_px[0], camera.project_ground(g.corners_phys[0].x, 0.0)});
  g.segments_px.push_back({g.corners_px[1], camera.project_ground(g.corners_phys[1].x, 0.0)});
  return g;
}

}  // namespace pidtc::synth
