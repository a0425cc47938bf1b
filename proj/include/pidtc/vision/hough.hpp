#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "pidtc/geometry.hpp"
#include "pidtc/vision/image.hpp"

namespace pidtc::vision {

// Line in normal form x*cos(theta) + y*sin(theta) = rho, theta in [0, pi),
// rho signed in pixels. slope_intercept is the (a, b) of y = a*x + b and is
// absent for vertical lines (sin(theta) == 0).
struct HoughLine {
  double rho = 0.0;
  double theta = 0.0;
  int votes = 0;
  std::optional<std::pair<double, double>> slope_intercept;
};

namespace detail {

inline void refresh_slope_intercept(HoughLine& line) {
  const double s = std::sin(line.theta);
  if (std::abs(s) > 1e-12) {
    line.slope_intercept = {{-std::cos(line.theta) / s, line.rho / s}};
  } else {
    line.slope_intercept.reset();
  }
}

// Canonical parameters: theta in [0, pi).
inline void normalize_line(double& rho, double& theta) {
  while (theta < 0.0) {
    theta += kPi;
    rho = -rho;
  }
  while (theta >= kPi) {
    theta -= kPi;
    rho = -rho;
  }
}

// Angular separation of two undirected lines, in [0, pi/2].
inline double line_angle_between(double t1, double t2) {
  double d = std::abs(t1 - t2);
  while (d >= kPi) d -= kPi;
  return std::min(d, kPi - d);
}

}  // namespace detail

// Accumulator vote over all nonzero pixels of an edge map. Returns cells that
// are 8-neighborhood local maxima with at least min_votes, sorted by votes
// descending (ties: rho, then theta ascending).
inline std::vector<HoughLine> hough_lines(const GrayImage& edges, double rho_res = 1.0,
                                          double theta_res = kPi / 180.0, int min_votes = 80) {
  if (!(rho_res > 0.0)) throw ParameterError("hough_lines: rho_res must be positive");
  if (!(theta_res > 0.0) || theta_res > kPi / 2.0) {
    throw ParameterError("hough_lines: theta_res must lie in (0, pi/2]");
  }
  if (min_votes < 1) throw ParameterError("hough_lines: min_votes must be >= 1");
  const double diag = std::hypot(edges.width, edges.height);
  const int n_theta = static_cast<int>(std::llround(kPi / theta_res));
  const int n_rho = 2 * static_cast<int>(std::ceil(diag / rho_res)) + 1;
  const int rho_mid = n_rho / 2;
  if (static_cast<long long>(n_theta) * n_rho > 200'000'000LL) {
    throw ParameterError("hough_lines: accumulator too large at this resolution");
  }

  std::vector<double> cos_t(static_cast<std::size_t>(n_theta));
  std::vector<double> sin_t(static_cast<std::size_t>(n_theta));
  for (int t = 0; t < n_theta; ++t) {
    cos_t[static_cast<std::size_t>(t)] = std::cos(t * theta_res);
    sin_t[static_cast<std::size_t>(t)] = std::sin(t * theta_res);
  }

  std::vector<int> acc(static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_rho), 0);
  for (int y = 0; y < edges.height; ++y) {
    for (int x = 0; x < edges.width; ++x) {
      if (edges.at(x, y) == 0.0) continue;
      for (int t = 0; t < n_theta; ++t) {
        const double rho = x * cos_t[static_cast<std::size_t>(t)] + y * sin_t[static_cast<std::size_t>(t)];
        const int r = rho_mid + static_cast<int>(std::llround(rho / rho_res));
        if (r < 0 || r >= n_rho) continue;
        ++acc[static_cast<std::size_t>(t) * static_cast<std::size_t>(n_rho) + static_cast<std::size_t>(r)];
      }
    }
  }

  auto acc_at = [&](int t, int r) -> int {
    if (t < 0 || t >= n_theta || r < 0 || r >= n_rho) return -1;
    return acc[static_cast<std::size_t>(t) * static_cast<std::size_t>(n_rho) + static_cast<std::size_t>(r)];
  };

  std::vector<HoughLine> out;
  for (int t = 0; t < n_theta; ++t) {
    for (int r = 0; r < n_rho; ++r) {
      const int v = acc_at(t, r);
      if (v < min_votes) continue;
      bool is_peak = true;
      for (int dt = -1; dt <= 1 && is_peak; ++dt) {
        for (int dr = -1; dr <= 1; ++dr) {
          if (dt == 0 && dr == 0) continue;
          if (acc_at(t + dt, r + dr) > v) {
            is_peak = false;
            break;
          }
        }
      }
      if (!is_peak) continue;
      HoughLine line;
      line.rho = (r - rho_mid) * rho_res;
      line.theta = t * theta_res;
      line.votes = v;
      detail::refresh_slope_intercept(line);
      out.push_back(line);
    }
  }
  std::sort(out.begin(), out.end(), [](const HoughLine& a, const HoughLine& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    if (a.rho != b.rho) return a.rho < b.rho;
    return a.theta < b.theta;
  });
  return out;
}

// Total-least-squares refit of a line to the edge pixels within capture_dist
// of it, iterated so the capture window follows the improving fit. A long
// painted line smears its accumulator votes across neighboring cells, so the
// raw peak (or a vote-weighted cluster mean) can sit a few pixels off the
// true line; refitting against the pixels themselves removes that bias.
// votes becomes the inlier count. Lines with fewer than two inliers or a
// degenerate spread are returned unchanged.
inline HoughLine refine_line(const GrayImage& edges, HoughLine line, double capture_dist = 5.0,
                             int iterations = 2) {
  if (!(capture_dist > 0.0)) throw ParameterError("refine_line: capture_dist must be positive");
  if (iterations < 1) throw ParameterError("refine_line: iterations must be >= 1");
  for (int it = 0; it < iterations; ++it) {
    const double c = std::cos(line.theta), s = std::sin(line.theta);
    double mx = 0.0, my = 0.0;
    int n = 0;
    for (int y = 0; y < edges.height; ++y) {
      for (int x = 0; x < edges.width; ++x) {
        if (edges.at(x, y) == 0.0) continue;
        if (std::abs(x * c + y * s - line.rho) > capture_dist) continue;
        mx += x;
        my += y;
        ++n;
      }
    }
    if (n < 2) return line;
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int y = 0; y < edges.height; ++y) {
      for (int x = 0; x < edges.width; ++x) {
        if (edges.at(x, y) == 0.0) continue;
        if (std::abs(x * c + y * s - line.rho) > capture_dist) continue;
        const double dx = x - mx, dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
      }
    }
    if (sxx == 0.0 && sxy == 0.0 && syy == 0.0) return line;
    // Principal axis of the inlier cloud; the line normal is perpendicular.
    const double axis = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    double theta = axis + kPi / 2.0;
    double rho = mx * std::cos(theta) + my * std::sin(theta);
    detail::normalize_line(rho, theta);
    line.rho = rho;
    line.theta = theta;
    line.votes = n;
    detail::refresh_slope_intercept(line);
  }
  return line;
}

// Collapses near-duplicate lines (both stripe edges of one painted line, or
// plateau peaks) into vote-weighted mean lines. Tolerances are the maximum
// angle and rho gap for two lines to be considered the same physical line.
inline std::vector<HoughLine> merge_lines(std::vector<HoughLine> lines,
                                          double theta_tol = 5.0 * kPi / 180.0,
                                          double rho_tol = 10.0) {
  if (!(theta_tol >= 0.0) || !(rho_tol >= 0.0)) {
    throw ParameterError("merge_lines: tolerances must be non-negative");
  }
  std::sort(lines.begin(), lines.end(), [](const HoughLine& a, const HoughLine& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    if (a.rho != b.rho) return a.rho < b.rho;
    return a.theta < b.theta;
  });

  struct Cluster {
    double rho_sum = 0.0;    // vote-weighted, in the representative frame
    double theta_sum = 0.0;
    double rep_theta = 0.0;  // frame used to resolve the theta ~ theta+pi wrap
    int votes = 0;
  };
  std::vector<Cluster> clusters;

  for (const HoughLine& line : lines) {
    double rho = line.rho, theta = line.theta;
    detail::normalize_line(rho, theta);
    bool placed = false;
    for (Cluster& c : clusters) {
      double cand_rho = rho, cand_theta = theta;
      if (std::abs(cand_theta - c.rep_theta) > kPi / 2.0) {
        // Same undirected family across the theta wrap; flip into the
        // representative's frame.
        cand_theta += cand_theta < c.rep_theta ? kPi : -kPi;
        cand_rho = -cand_rho;
      }
      const double mean_theta = c.theta_sum / c.votes;
      const double mean_rho = c.rho_sum / c.votes;
      if (std::abs(cand_theta - mean_theta) <= theta_tol &&
          std::abs(cand_rho - mean_rho) <= rho_tol) {
        c.rho_sum += cand_rho * line.votes;
        c.theta_sum += cand_theta * line.votes;
        c.votes += line.votes;
        placed = true;
        break;
      }
    }
    if (!placed) {
      clusters.push_back({rho * line.votes, theta * line.votes, theta, line.votes});
    }
  }

  std::vector<HoughLine> out;
  out.reserve(clusters.size());
  for (const Cluster& c : clusters) {
    HoughLine line;
    double rho = c.rho_sum / c.votes;
    double theta = c.theta_sum / c.votes;
    detail::normalize_line(rho, theta);
    line.rho = rho;
    line.theta = theta;
    line.votes = c.votes;
    detail::refresh_slope_intercept(line);
    out.push_back(line);
  }
  std::sort(out.begin(), out.end(), [](const HoughLine& a, const HoughLine& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    if (a.rho != b.rho) return a.rho < b.rho;
    return a.theta < b.theta;
  });
  return out;
}

}  // namespace pidtc::vision
