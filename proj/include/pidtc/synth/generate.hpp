#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pidtc/data.hpp"
#include "pidtc/errors.hpp"
#include "pidtc/rng.hpp"
#include "pidtc/synth/court.hpp"
#include "pidtc/synth/dataset.hpp"
#include "pidtc/synth/trajectory.hpp"

namespace pidtc::synth {

struct GeneratorConfig {
  std::size_t count = 350;
  std::uint64_t seed = 1;
  double in_ratio = 0.5;   // target fraction of label-1 records, met exactly
  double noise_sd = 0.5;   // iid pixel noise on the 25 observed points
  int threads = 1;
};

struct GeneratedDataset {
  std::vector<DatasetRecord> records;
  CameraModel camera;  // shared by every record in the dataset
};

// Landing placement relative to the sideline. "In" balls land deeper inside
// the court than "out" balls overshoot, so the label carries magnitude
// information about the landing depth, not only its sign.
inline constexpr double kInMarginMin = 0.3;
inline constexpr double kInMarginMax = 1.4;
inline constexpr double kOutMarginMin = 0.15;
inline constexpr double kOutMarginMax = 1.0;
// Landings stay in a corridor around the court's centre line; rally balls
// cluster there, and the bounded lateral spread keeps the depth structure
// (sideline + margin) from being swamped by lateral variance.
inline constexpr double kLandingHalfSpanX = 2.5;

inline constexpr double kLaunchDepthMin = 1.0;
inline constexpr double kLaunchDepthMax = 2.5;
inline constexpr double kLaunchHeightMin = 0.8;
inline constexpr double kLaunchHeightMax = 1.6;
inline constexpr double kFlightTimeMin = 0.6;
inline constexpr double kFlightTimeMax = 0.95;
inline constexpr double kLaunchLateralDrift = 2.5;
inline constexpr double kDragCoefficient = 0.3;

// Independent per-attempt stream so record generation is pure in
// (dataset seed, attempt index) and parallelizes without coordination.
inline std::uint64_t record_seed(std::uint64_t dataset_seed, std::uint64_t attempt) {
  std::uint64_t s = dataset_seed + 0x9e3779b97f4a7c15ULL * (attempt + 1);
  return splitmix64(s);
}

// One candidate record, or nullopt when the sampled configuration violates a
// record invariant (early bounce, too few frames, out-of-extent coordinate).
inline std::optional<DatasetRecord> generate_record(const CameraModel& camera,
                                                    std::uint64_t rec_seed, double noise_sd,
                                                    double in_ratio) {
  Rng rng(rec_seed);
  const bool want_in = rng.bernoulli(in_ratio);
  const CourtScene scene = sample_scene(rng);
  const CourtGeometry geometry = make_court_geometry(scene, camera);

  const double margin = want_in ? rng.uniform(kInMarginMin, kInMarginMax)
                                : rng.uniform(kOutMarginMin, kOutMarginMax);
  const double land_x =
      rng.uniform(kSceneCenterX - kLandingHalfSpanX, kSceneCenterX + kLandingHalfSpanX);
  const double land_y = scene.depth_at(land_x) + (want_in ? -margin : margin);

  LaunchParams params;
  params.drag = kDragCoefficient;
  params.position = Vec3{land_x + rng.uniform(-kLaunchLateralDrift, kLaunchLateralDrift),
                         rng.uniform(kLaunchDepthMin, kLaunchDepthMax),
                         rng.uniform(kLaunchHeightMin, kLaunchHeightMax)};
  const double flight_time = rng.uniform(kFlightTimeMin, kFlightTimeMax);
  params.velocity = solve_launch_velocity(params.position, Vec3{land_x, land_y, 0.0}, flight_time,
                                          params.gravity, params.drag);

  DatasetRecord record;
  try {
    const LandingEvent landing = find_landing(params);
    // The solve places the crossing at flight_time; an earlier crossing means
    // the arc dipped into the ground and the sampled landing intent is void.
    if (std::abs(landing.time - flight_time) > 1.0 / params.frame_rate) return std::nullopt;
    record = simulate_trajectory(params, geometry, rng, noise_sd);
  } catch (const SimulationError&) {
    return std::nullopt;
  }
  if (*record.sample.label != (want_in ? 1 : 0)) return std::nullopt;

  auto in_extent = [](const Point2& p) {
    return p.x >= 0.0 && p.x < kImageWidth && p.y >= 0.0 && p.y < kImageHeight;
  };
  if (!in_extent(record.sample.landing)) return std::nullopt;
  for (const Point2& p : record.sample.points) {
    if (!in_extent(p)) return std::nullopt;
  }
  record.seed = rec_seed;
  return record;
}

// Quota-exact generation: candidate attempts are pure per (seed, attempt) and
// evaluated in attempt order, so the output is independent of thread count.
inline GeneratedDataset generate_dataset(const GeneratorConfig& config) {
  if (config.in_ratio < 0.0 || config.in_ratio > 1.0) {
    throw ParameterError("dataset generation: in-ratio must lie in [0, 1]");
  }
  if (config.noise_sd < 0.0) throw ParameterError("dataset generation: noise sd must be >= 0");

  GeneratedDataset out;
  Rng camera_rng(config.seed, 0);
  out.camera = sample_camera(camera_rng);

  std::size_t quota_in = static_cast<std::size_t>(std::lround(
      static_cast<double>(config.count) * config.in_ratio));
  quota_in = std::min(quota_in, config.count);
  std::size_t quota_out = config.count - quota_in;

  const std::uint64_t max_attempts = 1000 * static_cast<std::uint64_t>(config.count) + 1000;
  const int threads = std::max(1, config.threads);
  const std::size_t batch = threads == 1 ? 1 : static_cast<std::size_t>(threads) * 16;

  std::uint64_t attempt = 0;
  while (out.records.size() < config.count) {
    if (attempt >= max_attempts) {
      throw SimulationError("dataset generation: quota not reached after " +
                            std::to_string(attempt) + " attempts");
    }
    const std::size_t n = static_cast<std::size_t>(
        std::min<std::uint64_t>(batch, max_attempts - attempt));
    std::vector<std::optional<DatasetRecord>> candidates(n);
    if (threads == 1) {
      candidates[0] = generate_record(out.camera, record_seed(config.seed, attempt),
                                      config.noise_sd, config.in_ratio);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(threads));
      for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t i = static_cast<std::size_t>(w); i < n;
               i += static_cast<std::size_t>(threads)) {
            candidates[i] = generate_record(out.camera, record_seed(config.seed, attempt + i),
                                            config.noise_sd, config.in_ratio);
          }
        });
      }
      for (std::thread& t : pool) t.join();
    }
    attempt += n;
    for (std::optional<DatasetRecord>& cand : candidates) {
      if (out.records.size() >= config.count) break;
      if (!cand) continue;
      std::size_t& quota = *cand->sample.label == 1 ? quota_in : quota_out;
      if (quota == 0) continue;
      --quota;
      out.records.push_back(std::move(*cand));
    }
  }
  return out;
}

}  // namespace pidtc::synth
