#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pidtc/errors.hpp"
#include "pidtc/geometry.hpp"
#include "pidtc/textio.hpp"

namespace pidtc::eval {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
};

// All three as percentages. Precision/recall stay absent when their
// denominator is zero — a degenerate classifier should look degenerate,
// not like a 0% or 100% one.
struct ClassificationMetrics {
  double accuracy = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
};

inline ClassificationMetrics confusion_metrics(const ConfusionCounts& c) {
  const std::size_t total = c.total();
  if (total == 0) throw DataError("confusion metrics: no evaluated samples");
  ClassificationMetrics m;
  m.accuracy = 100.0 * static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
  if (c.tp + c.fp > 0) {
    m.precision = 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn > 0) {
    m.recall = 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  return m;
}

struct RegressionMetrics {
  double mse = 0.0;      // mean squared Euclidean distance, px^2
  double rmse = 0.0;     // sqrt(mse), px
  double bias_px = 0.0;  // mean Euclidean distance, px
};

inline RegressionMetrics regression_metrics(const std::vector<Point2>& preds,
                                            const std::vector<Point2>& truths) {
  if (preds.size() != truths.size()) {
    throw ContractError("regression metrics: " + std::to_string(preds.size()) +
                        " predictions vs " + std::to_string(truths.size()) + " truths");
  }
  if (preds.empty()) throw DataError("regression metrics: no samples");
  double sq_sum = 0.0;
  double dist_sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = distance(preds[i], truths[i]);
    sq_sum += d * d;
    dist_sum += d;
  }
  RegressionMetrics m;
  m.mse = sq_sum / static_cast<double>(preds.size());
  m.rmse = std::sqrt(m.mse);
  m.bias_px = dist_sum / static_cast<double>(preds.size());
  return m;
}

// Mean binary cross-entropy with the same probability clamp the training
// loss uses, so reported BCE matches optimized BCE.
inline double bce_metric(const std::vector<double>& probs, const std::vector<int>& labels) {
  if (probs.size() != labels.size()) {
    throw ContractError("bce metric: " + std::to_string(probs.size()) + " probabilities vs " +
                        std::to_string(labels.size()) + " labels");
  }
  if (probs.empty()) throw DataError("bce metric: no samples");
  constexpr double kClamp = 1e-7;
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw LabelError("bce metric: label must be 0 or 1, got " + std::to_string(labels[i]));
    }
    const double p = std::min(1.0 - kClamp, std::max(kClamp, probs[i]));
    sum += labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  return sum / static_cast<double>(probs.size());
}

struct SampleResidual {
  std::size_t index = 0;
  Point2 pred;
  Point2 truth;
  double distance_px = 0.0;
};

struct EvalReport {
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> bce;
  std::optional<double> mse;
  std::optional<double> rmse;
  std::optional<double> bias_px;
  std::optional<double> phybias_cm;
  std::vector<SampleResidual> residuals;
};

struct ReportRow {
  std::string variant;
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> bce;
  std::optional<double> mse;
  std::optional<double> rmse;
  std::optional<double> bias_px;
  std::optional<double> phybias_cm;
};

inline ReportRow report_row(const std::string& variant, const EvalReport& r) {
  ReportRow row;
  row.variant = variant;
  row.accuracy = r.accuracy;
  row.precision = r.precision;
  row.recall = r.recall;
  row.bce = r.bce;
  row.mse = r.mse;
  row.rmse = r.rmse;
  row.bias_px = r.bias_px;
  row.phybias_cm = r.phybias_cm;
  return row;
}

inline constexpr const char* kReportHeader =
    "variant,accuracy,precision,recall,bce,mse,rmse,bias_px,phybias_cm";

// Absent metrics become empty cells, never 0.
inline std::string serialize_report(const std::vector<ReportRow>& rows) {
  auto cell = [](const std::optional<double>& v) {
    return v ? "," + format_double(*v) : std::string{","};
  };
  std::string out = std::string(kReportHeader) + "\n";
  for (const ReportRow& r : rows) {
    out += r.variant;
    out += cell(r.accuracy);
    out += cell(r.precision);
    out += cell(r.recall);
    out += cell(r.bce);
    out += cell(r.mse);
    out += cell(r.rmse);
    out += cell(r.bias_px);
    out += cell(r.phybias_cm);
    out += "\n";
  }
  return out;
}

inline std::string serialize_residuals(const std::vector<SampleResidual>& residuals) {
  std::string out = "index,pred_x,pred_y,truth_x,truth_y,distance_px\n";
  for (const SampleResidual& r : residuals) {
    out += std::to_string(r.index) + "," + format_double(r.pred.x) + "," +
           format_double(r.pred.y) + "," + format_double(r.truth.x) + "," +
           format_double(r.truth.y) + "," + format_double(r.distance_px) + "\n";
  }
  return out;
}

}  // namespace pidtc::eval
