#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "pidtc/geometry.hpp"
#include "pidtc/vision/corners.hpp"

namespace pidtc {

inline constexpr int kTrajectoryLength = 25;   // pre-bounce frames fed to the models
inline constexpr int kImageWidth = 1280;       // px, also the coordinate de-scaling extent
inline constexpr int kImageHeight = 650;
inline constexpr double kFrameRate = 164.0;    // capture rate, frames per second

// One labelled example: the 25 observed pre-bounce ball centers, the true
// landing point, the court-corner priors (absent until extraction ran), and
// the in/out class (absent for unlabelled inference input).
struct TrajectorySample {
  std::array<Point2, kTrajectoryLength> points{};
  Point2 landing;
  std::optional<vision::PriorPoints> priors;
  std::optional<int> label;  // 1 = in, 0 = out
};

}  // namespace pidtc
