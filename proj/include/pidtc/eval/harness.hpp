#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pidtc/data.hpp"
#include "pidtc/errors.hpp"
#include "pidtc/eval/homography.hpp"
#include "pidtc/eval/metrics.hpp"
#include "pidtc/eval/rnn.hpp"
#include "pidtc/model/config.hpp"
#include "pidtc/model/network.hpp"
#include "pidtc/model/train.hpp"
#include "pidtc/model/weights.hpp"
#include "pidtc/textio.hpp"

namespace pidtc::eval {

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

// Classifier quality on the indexed samples: confusion metrics from hard
// thresholding at 0.5 plus mean BCE of the raw probabilities.
inline EvalReport evaluate_classifier(const model::ModelWeights& w,
                                      const std::vector<TrajectorySample>& samples,
                                      const std::vector<std::size_t>& indices) {
  ConfusionCounts counts;
  std::vector<double> probs;
  std::vector<int> labels;
  probs.reserve(indices.size());
  labels.reserve(indices.size());
  for (std::size_t idx : indices) {
    const TrajectorySample& s = samples[idx];
    if (!s.label) throw DataError("evaluation: sample has no label");
    const double p = model::classify(w, s);
    const int predicted = p >= 0.5 ? 1 : 0;
    if (*s.label == 1) {
      (predicted == 1 ? counts.tp : counts.fn) += 1;
    } else {
      (predicted == 0 ? counts.tn : counts.fp) += 1;
    }
    probs.push_back(p);
    labels.push_back(*s.label);
  }
  const ClassificationMetrics m = confusion_metrics(counts);
  EvalReport r;
  r.accuracy = m.accuracy;
  r.precision = m.precision;
  r.recall = m.recall;
  r.bce = bce_metric(probs, labels);
  return r;
}

namespace detail {

inline void fill_regression(EvalReport& r, const std::vector<Point2>& preds,
                            const std::vector<Point2>& truths,
                            const std::vector<std::size_t>& indices,
                            const Homography* image_to_court) {
  const RegressionMetrics m = regression_metrics(preds, truths);
  r.mse = m.mse;
  r.rmse = m.rmse;
  r.bias_px = m.bias_px;
  if (image_to_court != nullptr) {
    r.phybias_cm = physical_bias_cm(*image_to_court, preds, truths);
  }
  r.residuals.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    r.residuals.push_back({indices[i], preds[i], truths[i], distance(preds[i], truths[i])});
  }
}

}  // namespace detail

// Teacher-forced predictor quality: ground-truth labels (or explicit
// overrides) feed any label tokens.
inline EvalReport evaluate_predictor(const model::ModelWeights& w,
                                     const std::vector<TrajectorySample>& samples,
                                     const std::vector<std::size_t>& indices,
                                     const Homography* image_to_court = nullptr,
                                     const std::vector<std::optional<int>>* overrides = nullptr) {
  std::vector<Point2> preds;
  std::vector<Point2> truths;
  preds.reserve(indices.size());
  truths.reserve(indices.size());
  for (std::size_t idx : indices) {
    const std::optional<int> ov = overrides ? (*overrides)[idx] : std::nullopt;
    preds.push_back(model::predict_landing(w, samples[idx], ov));
    truths.push_back(samples[idx].landing);
  }
  EvalReport r;
  detail::fill_regression(r, preds, truths, indices, image_to_court);
  return r;
}

// Full two-stage pipeline: the classifier's hard label feeds the predictor,
// so the report carries both classification and regression metrics.
inline EvalReport evaluate_cascade(const model::ModelWeights& classifier,
                                   const model::ModelWeights& predictor,
                                   const std::vector<TrajectorySample>& samples,
                                   const std::vector<std::size_t>& indices,
                                   const Homography* image_to_court = nullptr) {
  ConfusionCounts counts;
  std::vector<double> probs;
  std::vector<int> labels;
  std::vector<Point2> preds;
  std::vector<Point2> truths;
  for (std::size_t idx : indices) {
    const TrajectorySample& s = samples[idx];
    if (!s.label) throw DataError("evaluation: sample has no label");
    const model::CascadeResult c = model::cascade_infer(classifier, predictor, s);
    if (*s.label == 1) {
      (c.label == 1 ? counts.tp : counts.fn) += 1;
    } else {
      (c.label == 0 ? counts.tn : counts.fp) += 1;
    }
    probs.push_back(c.probability);
    labels.push_back(*s.label);
    preds.push_back(c.landing);
    truths.push_back(s.landing);
  }
  const ClassificationMetrics m = confusion_metrics(counts);
  EvalReport r;
  r.accuracy = m.accuracy;
  r.precision = m.precision;
  r.recall = m.recall;
  r.bce = bce_metric(probs, labels);
  detail::fill_regression(r, preds, truths, indices, image_to_court);
  return r;
}

// Training settings for the harness runners. Defaults mirror the standard
// regime (classifier 500 epochs, predictor 1000).
struct HarnessConfig {
  model::ModelConfig classifier = model::classifier_defaults();
  model::ModelConfig predictor = model::predictor_defaults();
  model::TrainConfig classifier_train;
  model::TrainConfig predictor_train = default_predictor_train();

  static model::TrainConfig default_predictor_train() {
    model::TrainConfig t;
    t.epochs = 1000;
    return t;
  }
};

struct HarnessResult {
  std::vector<ReportRow> rows;
  std::vector<std::filesystem::path> files;  // everything written under out_dir
};

namespace detail {

inline void write_artifact(const std::filesystem::path* out_dir, const std::string& name,
                           const std::string& content, HarnessResult& result) {
  if (out_dir == nullptr) return;
  const std::filesystem::path path = *out_dir / name;
  write_text_file(path, content);
  result.files.push_back(path);
}

inline void save_model_artifact(const std::filesystem::path* out_dir, const std::string& name,
                                const model::ModelWeights& w, const model::TrainConfig& tc,
                                HarnessResult& result) {
  if (out_dir == nullptr) return;
  const std::filesystem::path path = *out_dir / name;
  model::save_model(path.string(), w, tc);
  result.files.push_back(path);
  result.files.push_back(model::config_record_path(path.string()));
}

inline void finish_report(const std::filesystem::path* out_dir, HarnessResult& result) {
  if (out_dir == nullptr) return;
  const std::filesystem::path path = *out_dir / "report.csv";
  write_text_file(path, serialize_report(result.rows));
  result.files.push_back(path);
}

}  // namespace detail

// Trains and evaluates the two classifier variants (zero tokens vs prior
// tokens) and the three predictor variants (zero / prior / label tokens),
// all with identical seeds and splits, so row differences isolate what the
// auxiliary information is worth.
inline HarnessResult run_ablation(const std::vector<TrajectorySample>& samples,
                                  const HarnessConfig& cfg,
                                  const Homography* image_to_court = nullptr,
                                  const std::filesystem::path* out_dir = nullptr) {
  if (out_dir != nullptr) std::filesystem::create_directories(*out_dir);
  HarnessResult result;

  const std::pair<const char*, model::ClassifierAux> cls_variants[] = {
      {"CMN", model::ClassifierAux::kZeros},
      {"CMP", model::ClassifierAux::kPriors},
  };
  for (const auto& [name, aux] : cls_variants) {
    model::ModelConfig mc = cfg.classifier;
    mc.cls_aux = aux;
    const model::TrainResult tr = model::train_classifier(samples, mc, cfg.classifier_train);
    result.rows.push_back(report_row(name, evaluate_classifier(tr.weights, samples,
                                                               tr.split.test)));
    detail::write_artifact(out_dir, std::string(name) + ".trace.csv",
                           model::serialize_trace(tr.trace), result);
    detail::save_model_artifact(out_dir, std::string(name) + ".ckpt", tr.weights,
                                cfg.classifier_train, result);
  }

  const std::pair<const char*, model::PredictorAux> pred_variants[] = {
      {"PMN", model::PredictorAux::kZeros},
      {"PMP", model::PredictorAux::kPriors},
      {"PMC", model::PredictorAux::kLabel},
  };
  for (const auto& [name, aux] : pred_variants) {
    model::ModelConfig mc = cfg.predictor;
    mc.pred_aux = aux;
    const model::TrainResult tr = model::train_predictor(samples, mc, cfg.predictor_train);
    result.rows.push_back(report_row(
        name, evaluate_predictor(tr.weights, samples, tr.split.test, image_to_court)));
    detail::write_artifact(out_dir, std::string(name) + ".trace.csv",
                           model::serialize_trace(tr.trace), result);
    detail::save_model_artifact(out_dir, std::string(name) + ".ckpt", tr.weights,
                                cfg.predictor_train, result);
  }

  detail::finish_report(out_dir, result);
  return result;
}

// Label-conditioned transformer predictor vs the vanilla recurrent baseline
// under the same optimizer, loss, and split. Both rows are teacher-forced
// regressions, so the architectures are compared like for like.
inline HarnessResult run_compare(const std::vector<TrajectorySample>& samples,
                                 const HarnessConfig& cfg,
                                 const Homography* image_to_court = nullptr,
                                 const std::filesystem::path* out_dir = nullptr,
                                 const RnnConfig& rnn_cfg = RnnConfig{}) {
  if (out_dir != nullptr) std::filesystem::create_directories(*out_dir);
  HarnessResult result;

  {
    model::ModelConfig mc = cfg.predictor;
    mc.pred_aux = model::PredictorAux::kLabel;
    const model::TrainResult tr = model::train_predictor(samples, mc, cfg.predictor_train);
    result.rows.push_back(report_row(
        "PIDTC", evaluate_predictor(tr.weights, samples, tr.split.test, image_to_court)));
    detail::write_artifact(out_dir, "pidtc.trace.csv", model::serialize_trace(tr.trace), result);
    detail::save_model_artifact(out_dir, "pidtc.ckpt", tr.weights, cfg.predictor_train, result);
  }

  {
    const RnnTrainResult tr = rnn_baseline_train(samples, cfg.predictor_train, rnn_cfg);
    std::vector<Point2> preds;
    std::vector<Point2> truths;
    for (std::size_t idx : tr.split.test) {
      preds.push_back(rnn_infer(tr.weights, samples[idx]));
      truths.push_back(samples[idx].landing);
    }
    EvalReport r;
    detail::fill_regression(r, preds, truths, tr.split.test, image_to_court);
    result.rows.push_back(report_row("RNN", r));
    detail::write_artifact(out_dir, "rnn.trace.csv", model::serialize_trace(tr.trace), result);
    if (out_dir != nullptr) {
      const std::filesystem::path path = *out_dir / "rnn.ckpt";
      rnn_save(path.string(), tr.weights);
      result.files.push_back(path);
    }
  }

  detail::finish_report(out_dir, result);
  return result;
}

inline constexpr double kSweepFractions[] = {0.2, 0.4, 0.6, 0.8};

// Retrains the label-conditioned predictor on nested subsets of the training
// order and evaluates each stage on the fixed held-out split. The final
// fraction covers the whole training split, so that row reproduces the
// standard run exactly.
inline HarnessResult run_sweep(const std::vector<TrajectorySample>& samples,
                               const HarnessConfig& cfg,
                               const Homography* image_to_court = nullptr,
                               const std::filesystem::path* out_dir = nullptr) {
  if (out_dir != nullptr) std::filesystem::create_directories(*out_dir);
  HarnessResult result;

  model::ModelConfig mc = cfg.predictor;
  mc.pred_aux = model::PredictorAux::kLabel;
  for (double fraction : kSweepFractions) {
    const auto subset = static_cast<std::size_t>(
        std::lround(fraction * static_cast<double>(samples.size())));
    if (subset < 1) {
      throw DataError("sweep: fraction " + format_double(fraction) +
                      " yields less than one batch of training samples");
    }
    model::TrainConfig tc = cfg.predictor_train;
    tc.train_subset = subset;
    const model::TrainResult tr = model::train_predictor(samples, mc, tc);
    const std::string name = std::to_string(static_cast<int>(std::lround(fraction * 100))) + "%";
    result.rows.push_back(report_row(
        name, evaluate_predictor(tr.weights, samples, tr.split.test, image_to_court)));
    const std::string stem = "sweep-" + std::to_string(static_cast<int>(std::lround(fraction * 100)));
    detail::write_artifact(out_dir, stem + ".trace.csv", model::serialize_trace(tr.trace), result);
    detail::save_model_artifact(out_dir, stem + ".ckpt", tr.weights, tc, result);
  }

  detail::finish_report(out_dir, result);
  return result;
}

}  // namespace pidtc::eval
