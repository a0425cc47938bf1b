#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pidtc/errors.hpp"
#include "pidtc/geometry.hpp"
#include "pidtc/textio.hpp"

namespace pidtc::eval {

// Plane projective map, row-major 3x3, canonically scaled so m[8] == 1.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Homography identity() { return Homography{}; }

  Point2 apply(const Point2& p) const {
    const double w = m[6] * p.x + m[7] * p.y + m[8];
    if (std::abs(w) < 1e-12) {
      throw PointAtInfinityError("homography: point (" + std::to_string(p.x) + ", " +
                                 std::to_string(p.y) + ") maps to infinity");
    }
    return Point2{(m[0] * p.x + m[1] * p.y + m[2]) / w,
                  (m[3] * p.x + m[4] * p.y + m[5]) / w};
  }

  Homography inverse() const {
    const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) -
                       m[1] * (m[3] * m[8] - m[5] * m[6]) +
                       m[2] * (m[3] * m[7] - m[4] * m[6]);
    double scale = 0.0;
    for (double v : m) scale = std::max(scale, std::abs(v));
    if (std::abs(det) < 1e-15 * scale * scale * scale) {
      throw RankError("homography: matrix is singular, cannot invert");
    }
    Homography inv;
    inv.m[0] = (m[4] * m[8] - m[5] * m[7]) / det;
    inv.m[1] = (m[2] * m[7] - m[1] * m[8]) / det;
    inv.m[2] = (m[1] * m[5] - m[2] * m[4]) / det;
    inv.m[3] = (m[5] * m[6] - m[3] * m[8]) / det;
    inv.m[4] = (m[0] * m[8] - m[2] * m[6]) / det;
    inv.m[5] = (m[2] * m[3] - m[0] * m[5]) / det;
    inv.m[6] = (m[3] * m[7] - m[4] * m[6]) / det;
    inv.m[7] = (m[1] * m[6] - m[0] * m[7]) / det;
    inv.m[8] = (m[0] * m[4] - m[1] * m[3]) / det;
    if (std::abs(inv.m[8]) > 1e-12) {
      const double k = inv.m[8];
      for (double& v : inv.m) v /= k;
    }
    return inv;
  }
};

namespace detail {

// Similarity that moves the centroid to the origin and the mean distance to
// sqrt(2); conditioning step for the direct linear transform.
struct NormalizingTransform {
  double scale = 1.0;
  Point2 shift;  // applied after scaling: p' = scale * p - shift

  Point2 apply(const Point2& p) const { return Point2{scale * p.x - shift.x, scale * p.y - shift.y}; }
};

inline NormalizingTransform normalizer_for(const std::vector<Point2>& pts) {
  Point2 centroid{0.0, 0.0};
  for (const Point2& p : pts) centroid = centroid + p;
  centroid = centroid * (1.0 / static_cast<double>(pts.size()));
  double mean_dist = 0.0;
  for (const Point2& p : pts) mean_dist += distance(p, centroid);
  mean_dist /= static_cast<double>(pts.size());
  if (mean_dist < 1e-12) throw RankError("homography estimation: points are coincident");
  const double s = std::sqrt(2.0) / mean_dist;
  return NormalizingTransform{s, Point2{s * centroid.x, s * centroid.y}};
}

// Cyclic Jacobi eigendecomposition of a symmetric n x n matrix (row-major).
// Returns eigenvalues in `evals` and column eigenvectors in `evecs`.
inline void jacobi_eigen_symmetric(std::vector<double> a, std::size_t n, std::vector<double>& evals,
                                   std::vector<double>& evecs) {
  evecs.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) evecs[i * n + i] = 1.0;
  double frob = 0.0;
  for (double v : a) frob += v * v;
  frob = std::sqrt(frob);
  const double stop = std::max(1e-300, 1e-15 * frob);

  for (int sweep = 0; sweep < 128; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a[p * n + q] * a[p * n + q];
    if (std::sqrt(off) < stop) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double app = a[p * n + p], aqq = a[q * n + q];
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = evecs[k * n + p], vkq = evecs[k * n + q];
          evecs[k * n + p] = c * vkp - s * vkq;
          evecs[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  evals.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) evals[i] = a[i * n + i];
}

}  // namespace detail

// Direct linear transform with input conditioning: least-squares homography
// mapping src[i] -> dst[i]. Needs >= 4 correspondences in general position.
inline Homography estimate_homography(const std::vector<Point2>& src,
                                      const std::vector<Point2>& dst) {
  if (src.size() != dst.size()) {
    throw DimensionError("homography estimation: " + std::to_string(src.size()) +
                         " source points vs " + std::to_string(dst.size()) + " destination points");
  }
  if (src.size() < 4) {
    throw ParameterError("homography estimation: need at least 4 correspondences, got " +
                         std::to_string(src.size()));
  }
  const detail::NormalizingTransform ts = detail::normalizer_for(src);
  const detail::NormalizingTransform td = detail::normalizer_for(dst);

  // Rows of the constraint matrix A (2 per correspondence); accumulate AtA.
  std::vector<double> ata(81, 0.0);
  auto accumulate = [&ata](const std::array<double, 9>& row) {
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = 0; j < 9; ++j) ata[i * 9 + j] += row[i] * row[j];
  };
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Point2 s = ts.apply(src[i]);
    const Point2 d = td.apply(dst[i]);
    accumulate({-s.x, -s.y, -1.0, 0.0, 0.0, 0.0, d.x * s.x, d.x * s.y, d.x});
    accumulate({0.0, 0.0, 0.0, -s.x, -s.y, -1.0, d.y * s.x, d.y * s.y, d.y});
  }

  std::vector<double> evals, evecs;
  detail::jacobi_eigen_symmetric(ata, 9, evals, evecs);
  std::size_t i_min = 0, i_second = 1;
  if (evals[i_second] < evals[i_min]) std::swap(i_min, i_second);
  for (std::size_t i = 2; i < 9; ++i) {
    if (evals[i] < evals[i_min]) {
      i_second = i_min;
      i_min = i;
    } else if (evals[i] < evals[i_second]) {
      i_second = i;
    }
  }
  double largest = 0.0;
  for (double v : evals) largest = std::max(largest, std::abs(v));
  if (evals[i_second] <= std::max(1e-12, 1e-10 * largest)) {
    throw RankError("homography estimation: correspondences are degenerate (collinear points)");
  }

  std::array<double, 9> hn{};
  for (std::size_t k = 0; k < 9; ++k) hn[k] = evecs[k * 9 + i_min];

  // Denormalize: H = Td^{-1} * Hn * Ts, with Ts/Td the similarity matrices
  // [[s,0,-shift.x],[0,s,-shift.y],[0,0,1]].
  auto mat_mul3 = [](const std::array<double, 9>& a, const std::array<double, 9>& b) {
    std::array<double, 9> c{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) c[static_cast<std::size_t>(i * 3 + j)] +=
            a[static_cast<std::size_t>(i * 3 + k)] * b[static_cast<std::size_t>(k * 3 + j)];
    return c;
  };
  const std::array<double, 9> ts_mat{ts.scale, 0.0, -ts.shift.x, 0.0, ts.scale, -ts.shift.y,
                                     0.0, 0.0, 1.0};
  const std::array<double, 9> td_inv{1.0 / td.scale, 0.0, td.shift.x / td.scale,
                                     0.0, 1.0 / td.scale, td.shift.y / td.scale,
                                     0.0, 0.0, 1.0};
  std::array<double, 9> h = mat_mul3(td_inv, mat_mul3(hn, ts_mat));
  if (std::abs(h[8]) < 1e-12) {
    throw RankError("homography estimation: result is not affine-normalizable (h33 ~ 0)");
  }
  Homography out;
  for (std::size_t k = 0; k < 9; ++k) out.m[k] = h[k] / h[8];
  return out;
}

inline Point2 apply_homography(const Homography& h, const Point2& p) { return h.apply(p); }

// Text sidecar: the 9 matrix entries row-major, three per line.
inline std::string serialize_homography(const Homography& h) {
  std::string out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out += format_double(h.m[static_cast<std::size_t>(r * 3 + c)]);
      out += c == 2 ? '\n' : ' ';
    }
  }
  return out;
}

inline void write_homography(const std::string& path, const Homography& h) {
  write_text_file(path, serialize_homography(h));
}

inline Homography read_homography(const std::string& path) {
  const std::vector<std::string> tokens = split_ws(read_text_file(path));
  if (tokens.size() != 9) {
    throw DataError("homography sidecar " + path + ": expected 9 values, got " +
                    std::to_string(tokens.size()));
  }
  Homography h;
  for (std::size_t i = 0; i < 9; ++i) {
    try {
      h.m[i] = parse_double(tokens[i], i + 1);
    } catch (const ParseError& e) {
      throw DataError("homography sidecar " + path + ": " + e.what());
    }
  }
  return h;
}

// Mean Euclidean separation between predictions and ground truth after
// pulling both back to the court plane (meters), reported in centimeters.
inline double physical_bias_cm(const Homography& image_to_court, const std::vector<Point2>& pred,
                               const std::vector<Point2>& truth) {
  if (pred.size() != truth.size()) {
    throw ContractError("physical bias: " + std::to_string(pred.size()) + " predictions vs " +
                        std::to_string(truth.size()) + " ground-truth points");
  }
  if (pred.empty()) throw ParameterError("physical bias: no points");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sum += distance(image_to_court.apply(pred[i]), image_to_court.apply(truth[i]));
  }
  return sum / static_cast<double>(pred.size()) * 100.0;
}

}  // namespace pidtc::eval
