#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pidtc/data.hpp"
#include "pidtc/errors.hpp"
#include "pidtc/geometry.hpp"
#include "pidtc/model/train.hpp"
#include "pidtc/num/adam.hpp"
#include "pidtc/num/checkpoint.hpp"
#include "pidtc/num/ops.hpp"
#include "pidtc/num/tensor.hpp"
#include "pidtc/rng.hpp"

namespace pidtc::eval {

using num::NamedTensor;
using num::Tensor;

// Vanilla single-layer recurrent regressor: 25 scaled points in, final
// hidden state through a two-layer head to a landing point in pixels. Kept
// on the same optimizer, loss, and split as the transformer for a fair
// comparison.
struct RnnConfig {
  int hidden = 64;
  int head_embed = 64;

  void validate() const {
    if (hidden <= 0) throw ParameterError("rnn config: hidden must be positive");
    if (head_embed <= 0) throw ParameterError("rnn config: head embed must be positive");
  }
};

struct RnnWeights {
  RnnConfig config;
  std::vector<NamedTensor> params;
  Tensor w_ih, w_hh, b;
  Tensor head_w1, head_b1, head_w2, head_b2;

  std::vector<Tensor> trainable() const {
    std::vector<Tensor> out;
    out.reserve(params.size());
    for (const NamedTensor& p : params) out.push_back(p.tensor);
    return out;
  }
};

namespace detail {

inline void bind_rnn_views(RnnWeights& w) {
  if (w.params.size() != 7) {
    throw CheckpointError("rnn checkpoint: expected 7 tensors, got " +
                          std::to_string(w.params.size()));
  }
  const char* names[] = {"rnn.w_ih", "rnn.w_hh", "rnn.b",
                         "head.w1",  "head.b1",  "head.w2", "head.b2"};
  Tensor* views[] = {&w.w_ih, &w.w_hh, &w.b, &w.head_w1, &w.head_b1, &w.head_w2, &w.head_b2};
  for (std::size_t i = 0; i < 7; ++i) {
    if (w.params[i].name != names[i]) {
      throw CheckpointError("rnn checkpoint: tensor " + std::to_string(i) + " is '" +
                            w.params[i].name + "', expected '" + names[i] + "'");
    }
    *views[i] = w.params[i].tensor;
  }
}

}  // namespace detail

inline RnnWeights rnn_init(const RnnConfig& config, std::uint64_t seed) {
  config.validate();
  const auto h = static_cast<std::size_t>(config.hidden);
  const auto e = static_cast<std::size_t>(config.head_embed);
  Rng rng(seed, 0);
  auto matrix = [&rng](const std::string& name, std::size_t rows, std::size_t cols) {
    const double bound = std::sqrt(1.0 / static_cast<double>(rows));
    std::vector<double> values(rows * cols);
    for (double& v : values) v = rng.uniform(-bound, bound);
    return NamedTensor{name, Tensor::param({rows, cols}, values)};
  };
  auto bias = [](const std::string& name, std::size_t n) {
    return NamedTensor{name, Tensor::param({n}, std::vector<double>(n, 0.0))};
  };
  RnnWeights w;
  w.config = config;
  w.params.push_back(matrix("rnn.w_ih", 2, h));
  w.params.push_back(matrix("rnn.w_hh", h, h));
  w.params.push_back(bias("rnn.b", h));
  w.params.push_back(matrix("head.w1", h, e));
  w.params.push_back(bias("head.b1", e));
  w.params.push_back(matrix("head.w2", e, 2));
  w.params.push_back(bias("head.b2", 2));
  detail::bind_rnn_views(w);
  return w;
}

inline Tensor rnn_forward(const RnnWeights& w, const TrajectorySample& s) {
  const auto h = static_cast<std::size_t>(w.config.hidden);
  Tensor hidden = Tensor::constant({1, h}, std::vector<double>(h, 0.0));
  for (std::size_t t = 0; t < kTrajectoryLength; ++t) {
    const Tensor x = Tensor::constant(
        {1, 2}, {s.points[t].x / kImageWidth, s.points[t].y / kImageHeight});
    hidden = num::tanh(num::add_row_broadcast(
        num::add(num::matmul(x, w.w_ih), num::matmul(hidden, w.w_hh)), w.b));
  }
  const Tensor mid = num::relu(num::add_row_broadcast(num::matmul(hidden, w.head_w1), w.head_b1));
  const Tensor out = num::add_row_broadcast(num::matmul(mid, w.head_w2), w.head_b2);
  return num::mul(out, Tensor::constant({1, 2}, {kImageWidth, kImageHeight}));
}

inline Point2 rnn_infer(const RnnWeights& w, const TrajectorySample& s) {
  const Tensor out = rnn_forward(w, s);
  return {out.at(0, 0), out.at(0, 1)};
}

struct RnnTrainResult {
  RnnWeights weights;  // best-validation snapshot
  std::vector<model::EpochTrace> trace;
  double best_test_loss = 0.0;
  int best_epoch = 0;
  model::SplitIndices split;
};

namespace detail {

inline double rnn_split_loss(const RnnWeights& w, const std::vector<TrajectorySample>& samples,
                             const std::vector<std::size_t>& indices) {
  double sum = 0.0;
  for (std::size_t idx : indices) {
    sum += num::mse_points(rnn_forward(w, samples[idx]),
                           Tensor::constant({1, 2},
                                            {samples[idx].landing.x, samples[idx].landing.y}))
               .item();
  }
  return sum / static_cast<double>(indices.size());
}

}  // namespace detail

inline RnnTrainResult rnn_baseline_train(const std::vector<TrajectorySample>& samples,
                                         const model::TrainConfig& tc,
                                         const RnnConfig& rc = RnnConfig{}) {
  tc.validate();
  rc.validate();
  if (samples.empty()) throw DataError("training: dataset is empty");

  RnnTrainResult result;
  result.split = model::split_indices(samples.size(), tc.train_fraction, tc.split_seed);
  std::vector<std::size_t> active = result.split.train;
  if (tc.train_subset > 0 && tc.train_subset < active.size()) active.resize(tc.train_subset);
  if (active.empty()) throw DataError("training: train split is empty");

  result.weights = rnn_init(rc, tc.seed);
  num::AdamOptimizer adam(result.weights.trainable(), tc.lr);
  Rng shuffle_rng(tc.seed, 2);

  std::vector<std::vector<double>> best_values;
  result.best_test_loss = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    shuffle_rng.shuffle(active);
    double train_sum = 0.0;
    for (std::size_t start = 0; start < active.size();
         start += static_cast<std::size_t>(tc.batch_size)) {
      const std::size_t stop =
          std::min(active.size(), start + static_cast<std::size_t>(tc.batch_size));
      adam.zero_grad();
      Tensor batch_loss;
      for (std::size_t i = start; i < stop; ++i) {
        const TrajectorySample& s = samples[active[i]];
        const Tensor li = num::mse_points(rnn_forward(result.weights, s),
                                          Tensor::constant({1, 2}, {s.landing.x, s.landing.y}));
        batch_loss = batch_loss.defined() ? num::add(batch_loss, li) : li;
      }
      batch_loss = num::scale(batch_loss, 1.0 / static_cast<double>(stop - start));
      num::backward(batch_loss);
      adam.step();
      train_sum += batch_loss.item() * static_cast<double>(stop - start);
    }
    const double train_loss = train_sum / static_cast<double>(active.size());
    const double test_loss =
        result.split.test.empty()
            ? train_loss
            : detail::rnn_split_loss(result.weights, samples, result.split.test);
    result.trace.push_back({epoch, train_loss, test_loss});
    if (test_loss < result.best_test_loss) {
      result.best_test_loss = test_loss;
      result.best_epoch = epoch;
      best_values.clear();
      best_values.reserve(result.weights.params.size());
      for (const NamedTensor& p : result.weights.params) best_values.push_back(p.tensor.values());
    }
  }

  if (!best_values.empty()) {
    for (std::size_t i = 0; i < result.weights.params.size(); ++i) {
      result.weights.params[i].tensor.values() = best_values[i];
    }
  } else if (tc.epochs == 0) {
    result.best_test_loss = detail::rnn_split_loss(
        result.weights, samples, result.split.test.empty() ? active : result.split.test);
  }
  return result;
}

inline void rnn_save(const std::string& path, const RnnWeights& w) {
  num::save_checkpoint(path, w.params);
}

inline RnnWeights rnn_load(const std::string& path) {
  RnnWeights w;
  w.params = num::load_checkpoint(path);
  detail::bind_rnn_views(w);
  if (w.params[0].tensor.shape()[0] != 2 || w.params[5].tensor.shape()[1] != 2) {
    throw CheckpointError("rnn checkpoint: unexpected input/output widths");
  }
  w.config.hidden = static_cast<int>(w.params[0].tensor.shape()[1]);
  w.config.head_embed = static_cast<int>(w.params[3].tensor.shape()[1]);
  w.config.validate();
  return w;
}

}  // namespace pidtc::eval
