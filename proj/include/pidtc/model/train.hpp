#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "pidtc/data.hpp"
#include "pidtc/errors.hpp"
#include "pidtc/model/config.hpp"
#include "pidtc/model/network.hpp"
#include "pidtc/model/weights.hpp"
#include "pidtc/num/adam.hpp"
#include "pidtc/rng.hpp"
#include "pidtc/textio.hpp"

namespace pidtc::model {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Shuffles 0..n-1 with the split seed and cuts off the train part. Nested
// subsets (first k of `train`) are stable for a fixed split seed.
inline SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t split_seed) {
  if (!(train_fraction > 0.0) || train_fraction >= 1.0) {
    throw ParameterError("split: train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(split_seed, 3);
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(
      std::lround(train_fraction * static_cast<double>(n)));
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, n)));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, n)), order.end());
  return s;
}

struct EpochTrace {
  int epoch = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
};

inline std::string serialize_trace(const std::vector<EpochTrace>& trace) {
  std::string out = "epoch,train_loss,test_loss\n";
  for (const EpochTrace& t : trace) {
    out += std::to_string(t.epoch) + "," + format_double(t.train_loss) + "," +
           format_double(t.test_loss) + "\n";
  }
  return out;
}

struct TrainResult {
  ModelWeights weights;  // best-validation snapshot
  std::vector<EpochTrace> trace;
  double best_test_loss = 0.0;
  int best_epoch = 0;
  SplitIndices split;
};

namespace detail {

// Per-sample loss: BCE against the in/out label for classifiers, squared
// pixel distance for predictors.
inline Tensor sample_loss(const ModelWeights& w, const TrajectorySample& s,
                          const ForwardContext& ctx, std::optional<int> label_override) {
  const Tensor out = forward_sample(w, s, ctx, label_override);
  if (w.config.kind == ModelKind::kClassifier) {
    if (!s.label) throw ContractError("training: classifier sample has no label");
    return num::binary_cross_entropy(out, Tensor::constant({1, 1},
                                                           {static_cast<double>(*s.label)}));
  }
  return num::mse_points(out, Tensor::constant({1, 2}, {s.landing.x, s.landing.y}));
}

}  // namespace detail

// Mean loss over the indexed samples without dropout or weight updates.
inline double evaluate_loss(const ModelWeights& w, const std::vector<TrajectorySample>& samples,
                            const std::vector<std::size_t>& indices,
                            const std::vector<std::optional<int>>* label_overrides = nullptr) {
  if (indices.empty()) throw DataError("evaluation: no samples");
  const ForwardContext ctx = make_context(w.config);
  double sum = 0.0;
  for (std::size_t idx : indices) {
    const std::optional<int> override_label =
        label_overrides ? (*label_overrides)[idx] : std::nullopt;
    sum += detail::sample_loss(w, samples[idx], ctx, override_label).item();
  }
  return sum / static_cast<double>(indices.size());
}

// Adam training with per-epoch loss trace and best-validation checkpointing.
// For a label-token predictor under cascade label sourcing, the classifier's
// hard predictions replace the dataset labels on every sample.
inline TrainResult train_model(const std::vector<TrajectorySample>& samples,
                               const ModelConfig& mc, const TrainConfig& tc,
                               const ModelWeights* cascade_classifier = nullptr) {
  mc.validate();
  tc.validate();
  if (samples.empty()) throw DataError("training: dataset is empty");

  TrainResult result;
  result.split = split_indices(samples.size(), tc.train_fraction, tc.split_seed);
  std::vector<std::size_t> active = result.split.train;
  if (tc.train_subset > 0 && tc.train_subset < active.size()) active.resize(tc.train_subset);
  if (active.empty()) throw DataError("training: train split is empty");

  const bool wants_labels = mc.kind == ModelKind::kPredictor && mc.pred_aux == PredictorAux::kLabel;
  std::vector<std::optional<int>> overrides(samples.size(), std::nullopt);
  if (wants_labels && tc.label_source == LabelSource::kCascade) {
    if (cascade_classifier == nullptr) {
      throw ParameterError("training: cascade label source requires a classifier");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
      overrides[i] = classify(*cascade_classifier, samples[i]) >= 0.5 ? 1 : 0;
    }
  }

  result.weights = init_model(mc, tc.seed);
  num::AdamOptimizer adam(result.weights.trainable(), tc.lr);
  Rng dropout_rng(tc.seed, 1);
  Rng shuffle_rng(tc.seed, 2);
  const ForwardContext train_ctx = make_context(mc, true, tc.dropout, &dropout_rng);

  std::vector<std::vector<double>> best_values;
  result.best_test_loss = std::numeric_limits<double>::infinity();
  result.best_epoch = 0;

  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    shuffle_rng.shuffle(active);
    double train_sum = 0.0;
    for (std::size_t start = 0; start < active.size();
         start += static_cast<std::size_t>(tc.batch_size)) {
      const std::size_t stop = std::min(active.size(), start + static_cast<std::size_t>(tc.batch_size));
      adam.zero_grad();
      Tensor batch_loss;
      for (std::size_t i = start; i < stop; ++i) {
        const Tensor li = detail::sample_loss(result.weights, samples[active[i]], train_ctx,
                                              overrides[active[i]]);
        batch_loss = batch_loss.defined() ? num::add(batch_loss, li) : li;
      }
      batch_loss = num::scale(batch_loss, 1.0 / static_cast<double>(stop - start));
      num::backward(batch_loss);
      adam.step();
      train_sum += batch_loss.item() * static_cast<double>(stop - start);
    }
    const double train_loss = train_sum / static_cast<double>(active.size());
    const double test_loss = result.split.test.empty()
                                 ? train_loss
                                 : evaluate_loss(result.weights, samples, result.split.test,
                                                 &overrides);
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
    result.best_test_loss = result.split.test.empty()
                                ? evaluate_loss(result.weights, samples, active, &overrides)
                                : evaluate_loss(result.weights, samples, result.split.test,
                                                &overrides);
  }
  return result;
}

inline TrainResult train_classifier(const std::vector<TrajectorySample>& samples,
                                    const ModelConfig& mc, const TrainConfig& tc) {
  if (mc.kind != ModelKind::kClassifier) throw ParameterError("train_classifier: config is not a classifier");
  return train_model(samples, mc, tc);
}

inline TrainResult train_predictor(const std::vector<TrajectorySample>& samples,
                                   const ModelConfig& mc, const TrainConfig& tc,
                                   const ModelWeights* cascade_classifier = nullptr) {
  if (mc.kind != ModelKind::kPredictor) throw ParameterError("train_predictor: config is not a predictor");
  return train_model(samples, mc, tc, cascade_classifier);
}

}  // namespace pidtc::model
