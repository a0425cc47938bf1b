// Release acceptance gate. Runs every criterion end to end against the real
// library and CLI, prints one [PASS]/[FAIL] line per criterion with the
// measured values, and exits with the number of failed criteria so CI can
// gate on zero. Expected total runtime is dominated by the trend criteria
// (6-8), which retrain the models across four seeds.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pidtc/data.hpp"
#include "pidtc/eval/harness.hpp"
#include "pidtc/eval/homography.hpp"
#include "pidtc/eval/metrics.hpp"
#include "pidtc/eval/rnn.hpp"
#include "pidtc/model/config.hpp"
#include "pidtc/model/network.hpp"
#include "pidtc/model/train.hpp"
#include "pidtc/num/ops.hpp"
#include "pidtc/num/tensor.hpp"
#include "pidtc/rng.hpp"
#include "pidtc/synth/generate.hpp"
#include "pidtc/synth/render.hpp"
#include "pidtc/vision/corners.hpp"
#include "pidtc/vision/filter.hpp"
#include "pidtc/vision/pgm.hpp"
#include "support/oracles.hpp"

namespace eval = pidtc::eval;
namespace fs = std::filesystem;
namespace model = pidtc::model;
namespace num = pidtc::num;
namespace synth = pidtc::synth;
namespace vision = pidtc::vision;
using model::ModelConfig;
using model::ModelKind;
using num::Tensor;
using pidtc::Point2;
using pidtc::Rng;
using pidtc::TrajectorySample;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

bool report(int criterion, bool pass, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, buf);
  std::fflush(stdout);
  return pass;
}

std::vector<TrajectorySample> make_samples(std::size_t count, std::uint64_t seed,
                                           double noise_sd) {
  synth::GeneratorConfig cfg;
  cfg.count = count;
  cfg.seed = seed;
  cfg.noise_sd = noise_sd;
  std::vector<TrajectorySample> out;
  for (const auto& r : synth::generate_dataset(cfg).records) out.push_back(r.sample);
  return out;
}

TrajectorySample sample_fixture(std::uint64_t seed) {
  Rng rng(seed);
  TrajectorySample s;
  for (auto& p : s.points) p = {rng.uniform(0.0, 1280.0), rng.uniform(0.0, 650.0)};
  s.landing = {rng.uniform(0.0, 1280.0), rng.uniform(0.0, 650.0)};
  s.priors = vision::PriorPoints{{rng.uniform(0.0, 1280.0), rng.uniform(0.0, 650.0)},
                                 {rng.uniform(0.0, 1280.0), rng.uniform(0.0, 650.0)}};
  s.label = 1;
  return s;
}

ModelConfig tiny_config(ModelKind kind) {
  ModelConfig c;
  c.kind = kind;
  c.d_model = 6;
  c.heads = 2;
  c.ff_dim = 8;
  c.embed = 10;
  return c;
}

Tensor random_param(Rng& rng, std::size_t rows, std::size_t cols, double lo = 0.1,
                    double hi = 1.0) {
  std::vector<double> v(rows * cols);
  for (double& x : v) {
    const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
    x = sign * rng.uniform(lo, hi);
  }
  return Tensor::param({rows, cols}, v);
}

Tensor random_const(Rng& rng, std::size_t rows, std::size_t cols) {
  std::vector<double> v(rows * cols);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::constant({rows, cols}, v);
}

Tensor random_vec_param(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::param({n}, v);
}

Tensor project(const Tensor& out, const Tensor& c) { return num::sum_all(num::mul(out, c)); }

// ---------------------------------------------------------------------------
// Criterion 1: finite-difference gradient checks, per op and end to end
// ---------------------------------------------------------------------------

bool criterion_1() {
  Timer timer;
  constexpr int kSeeds = 20;
  double worst_op = 0.0;
  using oracles::max_grad_rel_err;

  for (int seed = 1; seed <= kSeeds; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    Tensor a34 = random_param(rng, 3, 4);
    Tensor b34 = random_param(rng, 3, 4);
    Tensor b42 = random_param(rng, 4, 2);
    Tensor bias4 = random_vec_param(rng, 4);
    Tensor a35 = random_param(rng, 3, 5);
    Tensor gamma = random_vec_param(rng, 5);
    Tensor beta = random_vec_param(rng, 5);
    Tensor a23 = random_param(rng, 2, 3);
    Tensor b33 = random_param(rng, 3, 3);
    Tensor w32 = random_param(rng, 3, 2);
    Tensor big = random_param(rng, 5, 4);
    Tensor pred = random_param(rng, 4, 2, 0.2, 0.9);
    const Tensor c34 = random_const(rng, 3, 4);
    const Tensor c32 = random_const(rng, 3, 2);
    const Tensor c43 = random_const(rng, 4, 3);
    const Tensor c35 = random_const(rng, 3, 5);
    const Tensor c53 = random_const(rng, 5, 3);
    const Tensor c24 = random_const(rng, 2, 4);
    const Tensor c52 = random_const(rng, 5, 2);
    const Tensor c16 = random_const(rng, 1, 6);
    const Tensor truth = random_const(rng, 4, 2);
    std::vector<double> pvals(3);
    for (double& p : pvals) p = rng.uniform(0.2, 0.8);
    Tensor probs = Tensor::param({3, 1}, pvals);
    const Tensor labels = Tensor::constant({3, 1}, {1.0, 0.0, 1.0});
    const auto u = static_cast<std::uint64_t>(seed);

    auto track = [&](double err) { worst_op = std::max(worst_op, err); };
    track(max_grad_rel_err({a34, b34}, [&] { return project(num::add(a34, b34), c34); }));
    track(max_grad_rel_err({a34, b34}, [&] { return project(num::sub(a34, b34), c34); }));
    track(max_grad_rel_err({a34, b34}, [&] { return project(num::mul(a34, b34), c34); }));
    track(max_grad_rel_err({a34}, [&] { return project(num::scale(a34, -1.7), c34); }));
    track(max_grad_rel_err({a34}, [&] { return project(num::add_scalar(a34, 2.5), c34); }));
    track(max_grad_rel_err({a34}, [&] { return project(num::relu(a34), c34); }));
    track(max_grad_rel_err({a34}, [&] { return project(num::sigmoid(a34), c34); }));
    track(max_grad_rel_err({a34}, [&] { return project(num::tanh(a34), c34); }));
    track(max_grad_rel_err({a34, b42}, [&] { return project(num::matmul(a34, b42), c32); }));
    track(max_grad_rel_err({a34}, [&] { return project(num::transpose(a34), c43); }));
    track(max_grad_rel_err({a34, bias4},
                           [&] { return project(num::add_row_broadcast(a34, bias4), c34); }));
    track(max_grad_rel_err({a35}, [&] { return project(num::softmax_rows(a35), c35); }));
    track(max_grad_rel_err(
        {a35, gamma, beta}, [&] { return project(num::layer_norm_rows(a35, gamma, beta), c35); }));
    track(max_grad_rel_err({a23, b33}, [&] { return project(num::concat_rows({a23, b33}), c53); }));
    track(max_grad_rel_err({w32, b33}, [&] { return project(num::concat_cols({w32, b33}), c35); }));
    track(max_grad_rel_err({big}, [&] { return project(num::slice_rows(big, 1, 2), c24); }));
    track(max_grad_rel_err({big}, [&] { return project(num::slice_cols(big, 1, 2), c52); }));
    track(max_grad_rel_err({a23}, [&] { return project(num::reshape(a23, {1, 6}), c16); }));
    track(max_grad_rel_err({a34}, [&] { return num::sum_all(a34); }));
    track(max_grad_rel_err({a34}, [&] { return num::mean_all(a34); }));
    track(max_grad_rel_err({pred}, [&] { return num::mse_points(pred, truth); }));
    track(max_grad_rel_err({probs}, [&] { return num::binary_cross_entropy(probs, labels); }));
    track(max_grad_rel_err({a34}, [&] {
      Rng mask_rng(u, 99);
      return project(num::dropout(a34, 0.3, mask_rng, true), c34);
    }));
  }

  // Full-model checks run at h = 1e-4 first. A relu kink inside the +/-h
  // stencil makes the quotient measure the wrong one-sided slope; that
  // artifact vanishes under refinement to h = 1e-6 while a genuine gradient
  // bug would persist, so flagged models are adjudicated at the finer step
  // and both numbers are reported.
  double worst_model = 0.0;
  double worst_raw = 0.0;
  int refined = 0;
  const TrajectorySample s = sample_fixture(10);
  const Tensor label = Tensor::constant({1, 1}, {1.0});
  const Tensor truth = Tensor::constant({1, 2}, {s.landing.x, s.landing.y});
  auto check_model = [&](const std::vector<Tensor>& params,
                         const std::function<Tensor()>& build) {
    const double raw = oracles::max_grad_rel_err(params, build);
    worst_raw = std::max(worst_raw, raw);
    double use = raw;
    if (raw > 1e-3) {
      use = oracles::max_grad_rel_err(params, build, 1e-6);
      ++refined;
    }
    worst_model = std::max(worst_model, use);
  };
  for (int seed = 1; seed <= kSeeds; ++seed) {
    auto cls = model::init_model(tiny_config(ModelKind::kClassifier), seed);
    const auto cls_ctx = model::make_context(cls.config);
    check_model(cls.trainable(), [&] {
      return num::binary_cross_entropy(model::forward_sample(cls, s, cls_ctx), label);
    });
    auto pcfg = tiny_config(ModelKind::kPredictor);
    pcfg.pred_aux = model::PredictorAux::kLabel;
    auto pred = model::init_model(pcfg, seed);
    const auto pred_ctx = model::make_context(pred.config);
    check_model(pred.trainable(), [&] {
      return num::mse_points(model::forward_sample(pred, s, pred_ctx), truth);
    });
  }

  const double elapsed = timer.seconds();
  const bool pass = worst_op <= 1e-4 && worst_model <= 1e-3 && elapsed < 60.0;
  return report(1, pass,
                "gradient checks: per-op max rel err %.2e (tol 1e-4), full-model max %.2e "
                "(tol 1e-3, raw h=1e-4 max %.1e, %d kink-flagged model(s) re-checked at "
                "h=1e-6), %d seeds, %.1fs (budget 60s)",
                worst_op, worst_model, worst_raw, refined, kSeeds, elapsed);
}

// ---------------------------------------------------------------------------
// Criterion 2: corner recovery on rendered courts
// ---------------------------------------------------------------------------

bool criterion_2() {
  Timer timer;
  int ok = 0;
  double worst = 0.0;
  for (unsigned seed = 1; seed <= 25; ++seed) {
    Rng rng(seed);
    const auto camera = synth::sample_camera(rng);
    const auto scene = synth::sample_scene(rng);
    const auto geometry = synth::make_court_geometry(scene, camera);
    const auto img = synth::render_court(geometry, 1280, 650, 4.0, 2.0, rng);
    double err = 1e9;
    try {
      const auto pts = vision::extract_priors(img);
      err = std::max(pidtc::distance(pts.p1, geometry.corners_px[0]),
                     pidtc::distance(pts.p2, geometry.corners_px[1]));
    } catch (const pidtc::Error&) {
    }
    if (err <= 2.0) ++ok;
    worst = std::max(worst, err);
  }
  const double elapsed = timer.seconds();
  const bool pass = ok >= 24 && elapsed < 60.0;
  return report(2, pass,
                "corner recovery: %d/25 courts within 2 px (need 24), worst %.2f px, "
                "noise sd 2.0, %.1fs (budget 60s)",
                ok, worst, elapsed);
}

// ---------------------------------------------------------------------------
// Criterion 3: closed-form formula checks and exact metric examples
// ---------------------------------------------------------------------------

bool criterion_3() {
  double kernel_dev = 0.0;
  for (int size : {3, 5, 7, 9}) {
    for (double sigma : {0.8, 1.4, 2.2}) {
      const auto k = vision::gaussian_kernel(size, sigma);
      double sum = 0.0;
      for (double v : k) sum += v;
      kernel_dev = std::max(kernel_dev, std::abs(sum - 1.0));
    }
  }

  double pe_dev = 0.0;
  const Tensor pe = model::positional_encoding(5, 8);
  for (int pos = 0; pos < 5; ++pos) {
    for (int j = 0; j < 8; ++j) {
      const double expo = static_cast<double>(2 * (j / 2)) / 8.0;
      const double angle = pos / std::pow(10000.0, expo);
      const double want = j % 2 == 0 ? std::sin(angle) : std::cos(angle);
      pe_dev = std::max(pe_dev, std::abs(pe.at(static_cast<std::size_t>(pos),
                                               static_cast<std::size_t>(j)) -
                                         want));
    }
  }

  double mha_dev = 0.0;
  for (std::uint64_t seed : {13ULL, 14ULL, 15ULL}) {
    Rng rng(seed);
    auto rand_param = [&rng](std::size_t r, std::size_t c) {
      std::vector<double> v(r * c);
      for (double& x : v) x = rng.uniform(-1.0, 1.0);
      return Tensor::param({r, c}, v);
    };
    const Tensor q_src = rand_param(5, 8);
    const Tensor kv_src = rand_param(7, 8);
    model::MhaWeights w{rand_param(8, 8), rand_param(8, 8), rand_param(8, 8), rand_param(8, 8)};
    const Tensor out = model::multi_head_attention(q_src, kv_src, w, 2);
    const auto ref = oracles::mha_ref(oracles::to_matrix(q_src), oracles::to_matrix(kv_src),
                                      oracles::to_matrix(w.wq), oracles::to_matrix(w.wk),
                                      oracles::to_matrix(w.wv), oracles::to_matrix(w.wo), 2);
    for (std::size_t r = 0; r < ref.size(); ++r) {
      for (std::size_t c = 0; c < ref[r].size(); ++c) {
        mha_dev = std::max(mha_dev, std::abs(out.at(r, c) - ref[r][c]));
      }
    }
  }

  // Hand-tabulated metric examples; these must match bit for bit.
  const auto cm = eval::confusion_metrics({.tp = 3, .tn = 2, .fp = 1, .fn = 4});
  const bool metrics_ok =
      cm.accuracy == 50.0 && cm.precision && *cm.precision == 75.0 && cm.recall &&
      *cm.recall == 3.0 / 7.0 * 100.0 &&
      eval::regression_metrics({{3.0, 4.0}}, {{0.0, 0.0}}).mse == 25.0 &&
      eval::regression_metrics({{3.0, 4.0}}, {{0.0, 0.0}}).rmse == 5.0 &&
      eval::regression_metrics({{3.0, 4.0}}, {{0.0, 0.0}}).bias_px == 5.0 &&
      eval::bce_metric({0.9, 0.2}, {1, 0}) == -(std::log(0.9) + std::log(0.8)) / 2.0;

  const bool pass =
      kernel_dev <= 1e-12 && pe_dev <= 1e-12 && mha_dev <= 1e-10 && metrics_ok;
  return report(3, pass,
                "formula fidelity: kernel sum dev %.1e (tol 1e-12), positional encoding dev "
                "%.1e (tol 1e-12), attention vs oracle dev %.1e (tol 1e-10), exact metric "
                "examples %s",
                kernel_dev, pe_dev, mha_dev, metrics_ok ? "ok" : "MISMATCH");
}

// ---------------------------------------------------------------------------
// Criterion 4: homography estimation round trip
// ---------------------------------------------------------------------------

bool criterion_4() {
  eval::Homography truth;
  truth.m = {1.2, 0.1, 30.0, -0.05, 0.9, 20.0, 1e-4, -2e-4, 1.0};
  const std::vector<Point2> src = {{0.0, 0.0},    {100.0, 0.0},  {0.0, 80.0},   {120.0, 90.0},
                                   {50.0, 40.0},  {200.0, 10.0}, {30.0, 160.0}, {170.0, 140.0},
                                   {80.0, 100.0}, {140.0, 60.0}};
  std::vector<Point2> dst;
  for (const Point2& p : src) dst.push_back(truth.apply(p));

  const eval::Homography est = eval::estimate_homography(src, dst);
  double entry_dev = 0.0;
  for (std::size_t i = 0; i < 9; ++i) entry_dev = std::max(entry_dev, std::abs(est.m[i] - truth.m[i]));

  double rt_dev = 0.0;
  const eval::Homography inv = est.inverse();
  for (const Point2& p : src) {
    const Point2 back = inv.apply(est.apply(p));
    rt_dev = std::max({rt_dev, std::abs(back.x - p.x), std::abs(back.y - p.y)});
  }

  const bool pass = entry_dev <= 1e-6 && rt_dev <= 1e-9;
  return report(4, pass,
                "homography: 10-point estimate max entry dev %.1e (tol 1e-6), "
                "apply-then-invert max dev %.1e (tol 1e-9)",
                entry_dev, rt_dev);
}

// ---------------------------------------------------------------------------
// Criterion 5: end-to-end desk run
// ---------------------------------------------------------------------------

bool criterion_5() {
  Timer timer;
  const auto samples = make_samples(350, 1, 0.5);

  ModelConfig cls_cfg = model::classifier_defaults();  // d 64 / heads 2 / ff 256 / embed 128
  model::TrainConfig cls_tc;
  cls_tc.epochs = 150;
  const auto cls = model::train_classifier(samples, cls_cfg, cls_tc);
  const auto cls_report = eval::evaluate_classifier(cls.weights, samples, cls.split.test);
  const double accuracy = cls_report.accuracy.value_or(0.0);

  ModelConfig pred_cfg = model::predictor_defaults();
  pred_cfg.d_model = 64;  // desk width; full width is exercised by criterion 9
  pred_cfg.ff_dim = 256;
  pred_cfg.embed = 128;
  model::TrainConfig pred_tc;
  pred_tc.epochs = 200;
  const auto pred = model::train_predictor(samples, pred_cfg, pred_tc);
  const auto pred_report = eval::evaluate_predictor(pred.weights, samples, pred.split.test);
  const double bias = pred_report.bias_px.value_or(1e9);

  const double elapsed = timer.seconds();
  const bool pass = accuracy >= 90.0 && bias <= 15.0 && elapsed <= 600.0;
  return report(5, pass,
                "desk run (350 records, 4:1 split, d_model 64): classifier test accuracy "
                "%.1f%% (need 90), predictor test bias %.2f px on true labels (limit 15), "
                "%.0fs (budget 600s)",
                accuracy, bias, elapsed);
}

// ---------------------------------------------------------------------------
// Criteria 6-8: directional trends across four seeds
// ---------------------------------------------------------------------------

// Trend regime: small widths and a mid-training epoch budget keep the four-
// seed retraining tractable on one core while the auxiliary-input effects are
// still visible (at full convergence every variant fits the trajectory alone).
constexpr std::size_t kTrendCount = 240;
constexpr double kTrendNoise = 2.0;
constexpr std::size_t kTrendDModel = 32;
constexpr std::size_t kTrendFf = 128;
constexpr std::size_t kTrendEmbed = 64;
constexpr int kTrendClsEpochs = 120;
constexpr int kTrendPredEpochs = 150;
constexpr double kTrendLr = 1e-3;
constexpr int kTrendSeeds = 4;

eval::HarnessConfig trend_config(int seed) {
  eval::HarnessConfig hc;
  hc.classifier = model::classifier_defaults();
  hc.classifier.d_model = kTrendDModel;
  hc.classifier.ff_dim = kTrendFf;
  hc.classifier.embed = kTrendEmbed;
  hc.predictor = model::predictor_defaults();
  hc.predictor.d_model = kTrendDModel;
  hc.predictor.ff_dim = kTrendFf;
  hc.predictor.embed = kTrendEmbed;
  hc.classifier_train.epochs = kTrendClsEpochs;
  hc.classifier_train.lr = kTrendLr;
  hc.classifier_train.seed = static_cast<std::uint64_t>(seed);
  hc.classifier_train.split_seed = static_cast<std::uint64_t>(seed);
  hc.predictor_train.epochs = kTrendPredEpochs;
  hc.predictor_train.lr = kTrendLr;
  hc.predictor_train.seed = static_cast<std::uint64_t>(seed);
  hc.predictor_train.split_seed = static_cast<std::uint64_t>(seed);
  return hc;
}

const std::vector<TrajectorySample>& trend_samples() {
  static const std::vector<TrajectorySample> samples =
      make_samples(kTrendCount, 1, kTrendNoise);
  return samples;
}

double cell(const std::optional<double>& v) { return v ? *v : -1.0; }

bool criterion_6() {
  Timer timer;
  int chain_ok = 0;
  int gap_ok = 0;
  std::string detail;
  for (int seed = 1; seed <= kTrendSeeds; ++seed) {
    const auto r = eval::run_ablation(trend_samples(), trend_config(seed));
    const double cmn = cell(r.rows[0].accuracy);
    const double cmp = cell(r.rows[1].accuracy);
    const double pmn = cell(r.rows[2].mse);
    const double pmp = cell(r.rows[3].mse);
    const double pmc = cell(r.rows[4].mse);
    chain_ok += pmc < pmp && pmp < pmn;
    gap_ok += cmp - cmn >= 20.0;
    char buf[96];
    std::snprintf(buf, sizeof buf, " s%d[gap %.0f chain %.0f/%.0f/%.0f]", seed, cmp - cmn, pmn,
                  pmp, pmc);
    detail += buf;
  }
  const bool pass = chain_ok >= 3 && gap_ok >= 3;
  return report(6, pass,
                "ablation trend: landing MSE chain label<priors<none on %d/%d seeds (need 3), "
                "classifier accuracy gap >= 20 pts on %d/%d seeds (need 3);%s, %.0fs",
                chain_ok, kTrendSeeds, gap_ok, kTrendSeeds, detail.c_str(), timer.seconds());
}

bool criterion_7() {
  Timer timer;
  int ok = 0;
  std::string detail;
  for (int seed = 1; seed <= kTrendSeeds; ++seed) {
    const auto r = eval::run_compare(trend_samples(), trend_config(seed));
    const double transformer = cell(r.rows[0].mse);
    const double rnn = cell(r.rows[1].mse);
    ok += transformer < rnn;
    char buf[64];
    std::snprintf(buf, sizeof buf, " s%d[%.1f vs %.1f]", seed, transformer, rnn);
    detail += buf;
  }
  const bool pass = ok >= 3;
  return report(7, pass,
                "comparison trend: transformer test MSE below recurrent baseline on %d/%d "
                "seeds (need 3);%s, %.0fs",
                ok, kTrendSeeds, detail.c_str(), timer.seconds());
}

bool criterion_8() {
  Timer timer;
  int ok = 0;
  std::string detail;
  for (int seed = 1; seed <= kTrendSeeds; ++seed) {
    const auto r = eval::run_sweep(trend_samples(), trend_config(seed));
    const double lo = cell(r.rows.front().mse);
    const double hi = cell(r.rows.back().mse);
    ok += hi <= lo;
    char buf[64];
    std::snprintf(buf, sizeof buf, " s%d[%.1f->%.1f]", seed, lo, hi);
    detail += buf;
  }
  const bool pass = ok >= 3;
  return report(8, pass,
                "training-fraction sweep: 80%% MSE <= 20%% MSE on %d/%d seeds (need 3);%s, "
                "%.0fs",
                ok, kTrendSeeds, detail.c_str(), timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 9: parameter accounting at full widths
// ---------------------------------------------------------------------------

bool criterion_9() {
  const std::size_t cls = model::parameter_count(model::classifier_defaults());
  const std::size_t pred = model::parameter_count(model::predictor_defaults());
  const bool cls_ok = cls >= 135000 && cls <= 165000;     // 0.15M +/- 10%
  const bool pred_ok = pred >= 4842000 && pred <= 5918000;  // 5.38M +/- 10%
  return report(9, cls_ok && pred_ok,
                "parameter accounting: classifier %zu (band 135000..165000), predictor %zu "
                "(band 4842000..5918000)",
                cls, pred);
}

// ---------------------------------------------------------------------------
// Criterion 10: CLI determinism
// ---------------------------------------------------------------------------

std::string cli_binary() {
  if (const char* env = std::getenv("PIDTC_CLI"); env != nullptr && *env != '\0') return env;
  return fs::absolute("build/tools/pidtc").string();
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    out[fs::relative(entry.path(), root).string()] = read_bytes(entry.path());
  }
  return out;
}

bool criterion_10() {
  Timer timer;
  const fs::path dir = fs::temp_directory_path() / "pidtc_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);

  {
    Rng rng(7);
    const auto camera = synth::sample_camera(rng);
    const auto scene = synth::sample_scene(rng);
    const auto geometry = synth::make_court_geometry(scene, camera);
    vision::write_pgm(dir / "court.pgm", synth::render_court(geometry, 1280, 650, 4.0, 1.0, rng));
  }

  const std::string tiny = " --d-model 6 --heads 2 --ff 8 --embed 10 --batch 6 --epochs 2";
  auto at = [&dir](const std::string& name) { return (dir / name).string(); };
  const std::vector<std::string> commands = {
      "gen-data --count 40 --seed 3 --out " + at("data.txt"),
      "extract-priors --image " + at("court.pgm") + " --out " + at("priors.txt"),
      "train-cls --data " + at("data.txt") + " --out " + at("cls.ckpt") + tiny,
      "train-pred --data " + at("data.txt") + " --out " + at("pred.ckpt") + tiny,
      "eval --data " + at("data.txt") + " --cls " + at("cls.ckpt") + " --pred " +
          at("pred.ckpt") + " --homography " + at("data.txt.homography.txt") + " --report " +
          at("report.csv"),
      "ablate --data " + at("data.txt") + " --out " + at("ab") +
          " --cls-epochs 2 --pred-epochs 2 --cls-d-model 6 --pred-d-model 6 --cls-ff 8 "
          "--pred-ff 8 --cls-embed 10 --pred-embed 10 --heads 2 --batch 6",
      "compare --data " + at("data.txt") + " --out " + at("cmp") +
          " --epochs 2 --d-model 6 --ff 8 --embed 10 --heads 2 --batch 6",
      "sweep --data " + at("data.txt") + " --out " + at("sw") +
          " --epochs 2 --d-model 6 --ff 8 --embed 10 --heads 2 --batch 6",
  };

  std::string failed_cmd;
  auto run_all = [&]() -> int {
    for (const std::string& cmd : commands) {
      const std::string full = cli_binary() + " " + cmd + " > /dev/null 2> /dev/null";
      const int rc = std::system(full.c_str());
      if (!WIFEXITED(rc) || WEXITSTATUS(rc) != 0) {
        failed_cmd = cmd.substr(0, cmd.find(' '));
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
      }
    }
    return 0;
  };

  int rc = run_all();
  if (rc != 0) {
    fs::remove_all(dir);
    return report(10, false, "CLI determinism: `%s` exited with status %d on the first pass",
                  failed_cmd.c_str(), rc);
  }
  const auto first = snapshot_tree(dir);
  rc = run_all();
  if (rc != 0) {
    fs::remove_all(dir);
    return report(10, false, "CLI determinism: `%s` exited with status %d on the rerun",
                  failed_cmd.c_str(), rc);
  }
  const auto second = snapshot_tree(dir);
  fs::remove_all(dir);

  std::size_t mismatched = 0;
  for (const auto& [name, bytes] : first) {
    auto it = second.find(name);
    if (it == second.end() || it->second != bytes) ++mismatched;
  }
  for (const auto& [name, bytes] : second) {
    if (!first.count(name)) ++mismatched;
  }
  const bool pass = mismatched == 0 && !first.empty();
  return report(10, pass,
                "CLI determinism: %zu subcommands rerun, %zu files compared, %zu mismatched, "
                "%.0fs",
                commands.size(), first.size(), mismatched, timer.seconds());
}

}  // namespace

int main() {
  int failures = 0;
  bool (*criteria[])() = {criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                          criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    try {
      if (!criteria[i]()) ++failures;
    } catch (const std::exception& e) {
      report(static_cast<int>(i) + 1, false, "unexpected error: %s", e.what());
      ++failures;
    }
  }
  std::printf("acceptance: %d/10 criteria passed\n", 10 - failures);
  return failures;
}
