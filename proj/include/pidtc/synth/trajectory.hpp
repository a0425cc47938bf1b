#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "pidtc/data.hpp"
#include "pidtc/errors.hpp"
#include "pidtc/geometry.hpp"
#include "pidtc/rng.hpp"
#include "pidtc/synth/court.hpp"

namespace pidtc::synth {

inline constexpr int kSimulationHorizonFrames = 4096;

// Ballistic launch under gravity and linear (Stokes) drag: v' = -drag*v + g.
struct LaunchParams {
  Vec3 position;  // meters at t = 0
  Vec3 velocity;  // m/s at t = 0
  double gravity = 9.81;
  double drag = 0.3;  // 1/s; 0 selects the exact drag-free branch
  double frame_rate = kFrameRate;
};

// Closed form: p(t) = p0 + v_inf*t + (v0 - v_inf)*(1 - e^{-kt})/k with
// v_inf = (0,0,-g/k); the k -> 0 limit is the familiar parabola.
inline Vec3 position_at(const LaunchParams& params, double t) {
  if (params.drag == 0.0) {
    Vec3 p = params.position + params.velocity * t;
    p.z -= 0.5 * params.gravity * t * t;
    return p;
  }
  const double k = params.drag;
  const Vec3 v_inf{0.0, 0.0, -params.gravity / k};
  const double decay = -std::expm1(-k * t) / k;
  return params.position + v_inf * t + (params.velocity - v_inf) * decay;
}

// Initial velocity that carries position_at from p0 to target in time T.
inline Vec3 solve_launch_velocity(const Vec3& p0, const Vec3& target, double flight_time,
                                  double gravity = 9.81, double drag = 0.3) {
  if (!(flight_time > 0.0)) throw ParameterError("launch solve: flight time must be positive");
  if (drag == 0.0) {
    Vec3 v = (target - p0) * (1.0 / flight_time);
    v.z += 0.5 * gravity * flight_time;
    return v;
  }
  const Vec3 v_inf{0.0, 0.0, -gravity / drag};
  const double decay = -std::expm1(-drag * flight_time) / drag;
  return v_inf + (target - p0 - v_inf * flight_time) * (1.0 / decay);
}

struct LandingEvent {
  double time = 0.0;     // first ground crossing, linearly interpolated
  Vec3 position;         // closed-form position at that time (z ~ 0)
  int bounce_frame = 0;  // crossing snapped to the nearest frame index
};

// Scans frame by frame for the first z <= 0 crossing, then interpolates the
// crossing time linearly between the bracketing frames.
inline LandingEvent find_landing(const LaunchParams& params) {
  if (params.frame_rate <= 0.0) throw ParameterError("landing search: frame rate must be positive");
  if (position_at(params, 0.0).z <= 0.0) {
    throw SimulationError("landing search: launch position is not above the ground");
  }
  const double dt = 1.0 / params.frame_rate;
  double z_prev = params.position.z;
  for (int i = 1; i <= kSimulationHorizonFrames; ++i) {
    const double t = i * dt;
    const double z = position_at(params, t).z;
    if (z <= 0.0) {
      const double t_prev = (i - 1) * dt;
      const double t_star = t_prev + dt * z_prev / (z_prev - z);
      LandingEvent event;
      event.time = t_star;
      event.position = position_at(params, t_star);
      event.bounce_frame = static_cast<int>(std::lround(t_star * params.frame_rate));
      return event;
    }
    z_prev = z;
  }
  throw SimulationError("landing search: ball never lands within " +
                        std::to_string(kSimulationHorizonFrames) + " frames");
}

// 1 when the landing point is on the court side of the sideline through the
// prior corners (below the line in image coordinates, y down), inclusive.
inline int assign_label(const Point2& landing, const vision::PriorPoints& prior) {
  if (distance(prior.p1, prior.p2) < 1e-9) {
    throw GeometryError("label assignment: prior corner points coincide");
  }
  return cross(prior.p2 - prior.p1, landing - prior.p1) >= 0.0 ? 1 : 0;
}

// One generated example plus its provenance. The launch params are kept for
// in-memory consumers only; serialization stores the seed.
struct DatasetRecord {
  TrajectorySample sample;
  std::uint64_t seed = 0;
  LaunchParams launch;
};

// Projects the 25 frames preceding the bounce frame through the camera, adds
// iid pixel noise to the observations (never to the landing point), and
// labels the record against the geometry's prior corners.
inline DatasetRecord simulate_trajectory(const LaunchParams& params, const CourtGeometry& geometry,
                                         Rng& rng, double pixel_noise_sd) {
  if (pixel_noise_sd < 0.0) throw ParameterError("trajectory simulation: noise sd must be >= 0");
  const LandingEvent landing = find_landing(params);
  if (landing.bounce_frame < kTrajectoryLength) {
    throw SimulationError("trajectory simulation: bounce at frame " +
                          std::to_string(landing.bounce_frame) + " leaves fewer than " +
                          std::to_string(kTrajectoryLength) + " observed frames");
  }
  DatasetRecord record;
  record.launch = params;
  const double dt = 1.0 / params.frame_rate;
  for (int j = 0; j < kTrajectoryLength; ++j) {
    const int frame = landing.bounce_frame - kTrajectoryLength + j;
    Point2 px = geometry.camera.project(position_at(params, frame * dt));
    if (pixel_noise_sd > 0.0) {
      px.x += rng.normal(0.0, pixel_noise_sd);
      px.y += rng.normal(0.0, pixel_noise_sd);
    }
    record.sample.points[static_cast<std::size_t>(j)] = px;
  }
  record.sample.landing =
      geometry.camera.project_ground(landing.position.x, landing.position.y);
  record.sample.priors = geometry.priors();
  record.sample.label = assign_label(record.sample.landing, *record.sample.priors);
  return record;
}

}  // namespace pidtc::synth
