#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "pidtc/num/tensor.hpp"
#include "pidtc/rng.hpp"

namespace pidtc::num {

namespace detail {

inline Tensor make_op(Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                      std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  for (const Tensor& t : inputs) {
    if (t.requires_grad()) n->requires_grad = true;
  }
  n->parents.reserve(inputs.size());
  for (const Tensor& t : inputs) n->parents.push_back(t.node());
  if (n->requires_grad) {
    n->backward = std::move(backward);
    n->ensure_grad();
  }
  return Tensor::from_node(std::move(n));
}

inline void ensure_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

inline void ensure_matrix(const Tensor& a, const char* op) {
  if (a.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a 2-D tensor, got " + shape_str(a.shape()));
  }
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::ensure_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return detail::make_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] += self.grad[i];
    }
  });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::ensure_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return detail::make_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] -= self.grad[i];
    }
  });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::ensure_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return detail::make_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] += self.grad[i] * pa.value[i];
    }
  });
}

inline Tensor scale(const Tensor& a, double k) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * k;
  return detail::make_op(a.shape(), std::move(out), {a}, [k](Node& self) {
    Node& pa = *self.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * k;
  });
}

inline Tensor add_scalar(const Tensor& a, double k) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + k;
  return detail::make_op(a.shape(), std::move(out), {a}, [](Node& self) {
    Node& pa = *self.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
  });
}

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  detail::ensure_matrix(a, "matmul");
  detail::ensure_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = &out[i * n];
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = av[i * k + l];
      if (ail == 0.0) continue;
      const double* brow = &bv[l * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += ail * brow[j];
    }
  }
  return detail::make_op({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = &self.grad[i * n];
        for (std::size_t l = 0; l < k; ++l) {
          const double* brow = &pb.value[l * n];
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          pa.grad[i * k + l] += acc;
        }
      }
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = &self.grad[i * n];
        for (std::size_t l = 0; l < k; ++l) {
          const double ail = pa.value[i * k + l];
          if (ail == 0.0) continue;
          double* brow = &pb.grad[l * n];
          for (std::size_t j = 0; j < n; ++j) brow[j] += ail * grow[j];
        }
      }
    }
  });
}

inline Tensor transpose(const Tensor& a) {
  detail::ensure_matrix(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> out(m * n);
  const auto& av = a.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  return detail::make_op({n, m}, std::move(out), {a}, [m, n](Node& self) {
    Node& pa = *self.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) pa.grad[i * n + j] += self.grad[j * m + i];
  });
}

// x (m x n) + bias (n), broadcast over rows.
inline Tensor add_row_broadcast(const Tensor& x, const Tensor& bias) {
  detail::ensure_matrix(x, "add_row_broadcast");
  if (bias.rank() != 1 || bias.size() != x.cols()) {
    throw DimensionError("add_row_broadcast: shape mismatch " + shape_str(x.shape()) + " vs " +
                         shape_str(bias.shape()));
  }
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(m * n);
  const auto& xv = x.values();
  const auto& bv = bias.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = xv[i * n + j] + bv[j];
  return detail::make_op({m, n}, std::move(out), {x, bias}, [m, n](Node& self) {
    Node& px = *self.parents[0];
    Node& pb = *self.parents[1];
    if (px.requires_grad) {
      px.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) px.grad[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) pb.grad[j] += self.grad[i * n + j];
    }
  });
}

// Subgradient at 0 is 0.
inline Tensor relu(const Tensor& a) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] > 0.0 ? av[i] : 0.0;
  return detail::make_op(a.shape(), std::move(out), {a}, [](Node& self) {
    Node& pa = *self.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa.value[i] > 0.0) pa.grad[i] += self.grad[i];
    }
  });
}

inline Tensor sigmoid(const Tensor& a) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-av[i]));
  return detail::make_op(a.shape(), std::move(out), {a}, [](Node& self) {
    Node& pa = *self.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double y = self.value[i];
      pa.grad[i] += self.grad[i] * y * (1.0 - y);
    }
  });
}

inline Tensor tanh(const Tensor& a) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(av[i]);
  return detail::make_op(a.shape(), std::move(out), {a}, [](Node& self) {
    Node& pa = *self.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double y = self.value[i];
      pa.grad[i] += self.grad[i] * (1.0 - y * y);
    }
  });
}

// Row-wise softmax, stabilized by subtracting the row max.
inline Tensor softmax_rows(const Tensor& a) {
  detail::ensure_matrix(a, "softmax_rows");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> out(m * n);
  const auto& av = a.values();
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = &av[i * n];
    double mx = row[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double e = std::exp(row[j] - mx);
      out[i * n + j] = e;
      sum += e;
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= sum;
  }
  return detail::make_op({m, n}, std::move(out), {a}, [m, n](Node& self) {
    Node& pa = *self.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < m; ++i) {
      const double* y = &self.value[i * n];
      const double* g = &self.grad[i * n];
      double dotp = 0.0;
      for (std::size_t j = 0; j < n; ++j) dotp += y[j] * g[j];
      double* dx = &pa.grad[i * n];
      for (std::size_t j = 0; j < n; ++j) dx[j] += y[j] * (g[j] - dotp);
    }
  });
}

// Row-wise layer norm with learned gamma/beta (rank-1, length n).
inline Tensor layer_norm_rows(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                              double eps = 1e-5) {
  detail::ensure_matrix(x, "layer_norm_rows");
  const std::size_t m = x.rows(), n = x.cols();
  if (n < 1) throw DimensionError("layer_norm_rows: empty rows");
  if (gamma.rank() != 1 || gamma.size() != n || beta.rank() != 1 || beta.size() != n) {
    throw DimensionError("layer_norm_rows: shape mismatch " + shape_str(x.shape()) + " vs gamma " +
                         shape_str(gamma.shape()) + ", beta " + shape_str(beta.shape()));
  }
  if (eps <= 0.0) throw ParameterError("layer_norm_rows: eps must be positive");
  std::vector<double> out(m * n);
  std::vector<double> xhat(m * n);
  std::vector<double> inv_sd(m);
  const auto& xv = x.values();
  const auto& gv = gamma.values();
  const auto& bv = beta.values();
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = &xv[i * n];
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += row[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = row[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_sd[i] = inv;
    for (std::size_t j = 0; j < n; ++j) {
      const double h = (row[j] - mean) * inv;
      xhat[i * n + j] = h;
      out[i * n + j] = gv[j] * h + bv[j];
    }
  }
  return detail::make_op(
      {m, n}, std::move(out), {x, gamma, beta},
      [m, n, xhat = std::move(xhat), inv_sd = std::move(inv_sd)](Node& self) {
        Node& px = *self.parents[0];
        Node& pg = *self.parents[1];
        Node& pb = *self.parents[2];
        if (pg.requires_grad) pg.ensure_grad();
        if (pb.requires_grad) pb.ensure_grad();
        if (px.requires_grad) px.ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
          const double* g = &self.grad[i * n];
          const double* h = &xhat[i * n];
          if (pg.requires_grad)
            for (std::size_t j = 0; j < n; ++j) pg.grad[j] += g[j] * h[j];
          if (pb.requires_grad)
            for (std::size_t j = 0; j < n; ++j) pb.grad[j] += g[j];
          if (px.requires_grad) {
            double mean_dh = 0.0, mean_dh_h = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              const double dh = g[j] * pg.value[j];
              mean_dh += dh;
              mean_dh_h += dh * h[j];
            }
            mean_dh /= static_cast<double>(n);
            mean_dh_h /= static_cast<double>(n);
            double* dx = &px.grad[i * n];
            for (std::size_t j = 0; j < n; ++j) {
              const double dh = g[j] * pg.value[j];
              dx[j] += (dh - mean_dh - h[j] * mean_dh_h) * inv_sd[i];
            }
          }
        }
      });
}

// Inverted dropout; identity (the same tensor) in inference mode or at rate 0.
inline Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ParameterError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.size());
  for (double& mk : mask) mk = rng.uniform() < rate ? 0.0 : keep_scale;
  std::vector<double> out(x.size());
  const auto& xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * mask[i];
  return detail::make_op(x.shape(), std::move(out), {x}, [mask = std::move(mask)](Node& self) {
    Node& px = *self.parents[0];
    px.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) px.grad[i] += self.grad[i] * mask[i];
  });
}

inline Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no inputs");
  const std::size_t n = parts[0].cols();
  std::size_t m = 0;
  for (const Tensor& p : parts) {
    detail::ensure_matrix(p, "concat_rows");
    if (p.cols() != n) {
      throw DimensionError("concat_rows: shape mismatch " + shape_str(parts[0].shape()) + " vs " +
                           shape_str(p.shape()));
    }
    m += p.rows();
  }
  std::vector<double> out;
  out.reserve(m * n);
  for (const Tensor& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  return detail::make_op({m, n}, std::move(out), parts, [](Node& self) {
    std::size_t off = 0;
    for (auto& parent : self.parents) {
      const std::size_t len = parent->value.size();
      if (parent->requires_grad) {
        parent->ensure_grad();
        for (std::size_t i = 0; i < len; ++i) parent->grad[i] += self.grad[off + i];
      }
      off += len;
    }
  });
}

inline Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count) {
  detail::ensure_matrix(x, "slice_rows");
  const std::size_t m = x.rows(), n = x.cols();
  if (start + count > m) {
    throw DimensionError("slice_rows: rows [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") exceed " + shape_str(x.shape()));
  }
  std::vector<double> out(x.values().begin() + static_cast<std::ptrdiff_t>(start * n),
                          x.values().begin() + static_cast<std::ptrdiff_t>((start + count) * n));
  return detail::make_op({count, n}, std::move(out), {x}, [start, n](Node& self) {
    Node& px = *self.parents[0];
    px.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) px.grad[start * n + i] += self.grad[i];
  });
}

inline Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const std::size_t m = parts[0].rows();
  std::size_t n = 0;
  for (const Tensor& p : parts) {
    detail::ensure_matrix(p, "concat_cols");
    if (p.rows() != m) {
      throw DimensionError("concat_cols: shape mismatch " + shape_str(parts[0].shape()) + " vs " +
                           shape_str(p.shape()));
    }
    n += p.cols();
  }
  std::vector<double> out(m * n);
  std::size_t off = 0;
  for (const Tensor& p : parts) {
    const std::size_t pn = p.cols();
    const auto& pv = p.values();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < pn; ++j) out[i * n + off + j] = pv[i * pn + j];
    off += pn;
  }
  return detail::make_op({m, n}, std::move(out), parts, [m, n](Node& self) {
    std::size_t off = 0;
    for (auto& parent : self.parents) {
      const std::size_t pn = parent->shape[1];
      if (parent->requires_grad) {
        parent->ensure_grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < pn; ++j)
            parent->grad[i * pn + j] += self.grad[i * n + off + j];
      }
      off += pn;
    }
  });
}

inline Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t count) {
  detail::ensure_matrix(x, "slice_cols");
  const std::size_t m = x.rows(), n = x.cols();
  if (start + count > n) {
    throw DimensionError("slice_cols: cols [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") exceed " + shape_str(x.shape()));
  }
  std::vector<double> out(m * count);
  const auto& xv = x.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < count; ++j) out[i * count + j] = xv[i * n + start + j];
  return detail::make_op({m, count}, std::move(out), {x}, [start, m, n, count](Node& self) {
    Node& px = *self.parents[0];
    px.ensure_grad();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < count; ++j)
        px.grad[i * n + start + j] += self.grad[i * count + j];
  });
}

inline Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape: " + shape_str(x.shape()) + " does not reshape to " +
                         shape_str(shape));
  }
  std::vector<double> out = x.values();
  return detail::make_op(std::move(shape), std::move(out), {x}, [](Node& self) {
    Node& px = *self.parents[0];
    px.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) px.grad[i] += self.grad[i];
  });
}

inline Tensor sum_all(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return detail::make_op({1}, {s}, {x}, [](Node& self) {
    Node& px = *self.parents[0];
    px.ensure_grad();
    for (double& g : px.grad) g += self.grad[0];
  });
}

inline Tensor mean_all(const Tensor& x) {
  if (x.size() == 0) throw ContractError("mean_all: empty tensor");
  double s = 0.0;
  for (double v : x.values()) s += v;
  const double inv = 1.0 / static_cast<double>(x.size());
  return detail::make_op({1}, {s * inv}, {x}, [inv](Node& self) {
    Node& px = *self.parents[0];
    px.ensure_grad();
    for (double& g : px.grad) g += self.grad[0] * inv;
  });
}

// Mean squared Euclidean distance between predicted and reference points
// (rows). The reference carries no gradient.
inline Tensor mse_points(const Tensor& pred, const Tensor& truth) {
  detail::ensure_same_shape(pred, truth, "mse_points");
  detail::ensure_matrix(pred, "mse_points");
  const std::size_t m = pred.rows();
  if (m == 0) throw ContractError("mse_points: no points");
  double s = 0.0;
  const auto& pv = pred.values();
  const auto& tv = truth.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double d = pv[i] - tv[i];
    s += d * d;
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  return detail::make_op({1}, {s * inv_m}, {pred, truth}, [inv_m](Node& self) {
    Node& pp = *self.parents[0];
    Node& pt = *self.parents[1];
    if (pp.requires_grad) {
      pp.ensure_grad();
      for (std::size_t i = 0; i < pp.value.size(); ++i)
        pp.grad[i] += self.grad[0] * 2.0 * (pp.value[i] - pt.value[i]) * inv_m;
    }
  });
}

inline constexpr double kBceClampLo = 1e-7;
inline constexpr double kBceClampHi = 1.0 - 1e-7;

// Mean binary cross entropy; probabilities are clamped to [1e-7, 1 - 1e-7].
// Labels must be exactly 0 or 1 and carry no gradient.
inline Tensor binary_cross_entropy(const Tensor& p, const Tensor& labels) {
  if (p.size() != labels.size()) {
    throw DimensionError("binary_cross_entropy: shape mismatch " + shape_str(p.shape()) + " vs " +
                         shape_str(labels.shape()));
  }
  const std::size_t m = p.size();
  if (m == 0) throw ContractError("binary_cross_entropy: empty batch");
  const auto& pv = p.values();
  const auto& qv = labels.values();
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (qv[i] != 0.0 && qv[i] != 1.0) {
      throw LabelError("binary_cross_entropy: label must be 0 or 1, got " + std::to_string(qv[i]));
    }
    const double ph = std::clamp(pv[i], kBceClampLo, kBceClampHi);
    s += -(qv[i] * std::log(ph) + (1.0 - qv[i]) * std::log(1.0 - ph));
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  return detail::make_op({1}, {s * inv_m}, {p, labels}, [inv_m](Node& self) {
    Node& pp = *self.parents[0];
    Node& pq = *self.parents[1];
    if (!pp.requires_grad) return;
    pp.ensure_grad();
    for (std::size_t i = 0; i < pp.value.size(); ++i) {
      const double raw = pp.value[i];
      if (raw < kBceClampLo || raw > kBceClampHi) continue;  // clamp is flat
      pp.grad[i] += self.grad[0] * (raw - pq.value[i]) / (raw * (1.0 - raw)) * inv_m;
    }
  });
}

}  // namespace pidtc::num
