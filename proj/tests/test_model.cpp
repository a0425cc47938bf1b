#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "pidtc/data.hpp"
#include "pidtc/model/config.hpp"
#include "pidtc/model/network.hpp"
#include "pidtc/model/train.hpp"
#include "pidtc/model/weights.hpp"
#include "pidtc/num/ops.hpp"
#include "pidtc/rng.hpp"
#include "pidtc/synth/generate.hpp"
#include "support/oracles.hpp"

namespace model = pidtc::model;
namespace num = pidtc::num;
namespace synth = pidtc::synth;
using model::ModelConfig;
using model::ModelKind;
using num::Tensor;
using pidtc::Point2;
using pidtc::Rng;
using pidtc::TrajectorySample;

namespace {

TrajectorySample sample_fixture(std::uint64_t seed, std::optional<int> label = 1) {
  Rng rng(seed);
  TrajectorySample s;
  for (auto& p : s.points) {
    p = {rng.uniform(0.0, 1280.0), rng.uniform(0.0, 650.0)};
  }
  s.landing = {rng.uniform(0.0, 1280.0), rng.uniform(0.0, 650.0)};
  s.priors = pidtc::vision::PriorPoints{{rng.uniform(0.0, 1280.0), rng.uniform(0.0, 650.0)},
                                        {rng.uniform(0.0, 1280.0), rng.uniform(0.0, 650.0)}};
  s.label = label;
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

model::ModelWeights zero_model(const ModelConfig& config) {
  std::vector<num::NamedTensor> tensors;
  for (const auto& spec : model::parameter_specs(config)) {
    tensors.push_back(
        {spec.name, Tensor::param(spec.shape, std::vector<double>(num::shape_size(spec.shape)))});
  }
  return model::make_model(config, std::move(tensors));
}

std::vector<synth::DatasetRecord> small_dataset(std::size_t count, std::uint64_t seed) {
  synth::GeneratorConfig cfg;
  cfg.count = count;
  cfg.seed = seed;
  return synth::generate_dataset(cfg).records;
}

std::vector<TrajectorySample> to_samples(const std::vector<synth::DatasetRecord>& records) {
  std::vector<TrajectorySample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.sample);
  return out;
}

}  // namespace

TEST(ParameterCount, MatchesHandDerivedTotalsForDefaultWidths) {
  EXPECT_EQ(model::parameter_count(model::classifier_defaults()), 147255u);
  EXPECT_EQ(model::parameter_count(model::predictor_defaults()), 5820664u);
}

TEST(ParameterCount, IdenticalAcrossAuxiliaryVariants) {
  ModelConfig cls = model::classifier_defaults();
  cls.cls_aux = model::ClassifierAux::kPriors;
  const std::size_t cls_count = model::parameter_count(cls);
  cls.cls_aux = model::ClassifierAux::kZeros;
  EXPECT_EQ(model::parameter_count(cls), cls_count);

  ModelConfig pred = model::predictor_defaults();
  std::vector<model::PredictorAux> variants = {model::PredictorAux::kZeros,
                                               model::PredictorAux::kPriors,
                                               model::PredictorAux::kLabel};
  for (const auto aux : variants) {
    pred.pred_aux = aux;
    EXPECT_EQ(model::parameter_count(pred), 5820664u);
  }
}

TEST(PositionalEncoding, MatchesClosedFormTable) {
  const int count = 5, d = 8;
  const Tensor pe = model::positional_encoding(count, d);
  for (int pos = 0; pos < count; ++pos) {
    for (int j = 0; j < d; ++j) {
      const double expo = static_cast<double>(2 * (j / 2)) / d;
      const double angle = pos / std::pow(10000.0, expo);
      const double want = j % 2 == 0 ? std::sin(angle) : std::cos(angle);
      EXPECT_NEAR(pe.at(static_cast<std::size_t>(pos), static_cast<std::size_t>(j)), want, 1e-12);
    }
  }
  // Position 3 at wavelength 10000^(1/2) = 100 gives angle 0.03 exactly.
  EXPECT_NEAR(pe.at(3, 4), 0.029995500202495663, 1e-15);
  EXPECT_DOUBLE_EQ(pe.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(pe.at(0, 1), 1.0);
  EXPECT_THROW(model::positional_encoding(0, 8), pidtc::ParameterError);
  EXPECT_THROW(model::positional_encoding(4, 0), pidtc::ParameterError);
}

TEST(MultiHeadAttention, MatchesBruteForceOracle) {
  Rng rng(13);
  auto rand_param = [&rng](std::size_t r, std::size_t c) {
    std::vector<double> v(r * c);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return Tensor::param({r, c}, v);
  };
  const std::size_t d = 8;
  const Tensor q_src = rand_param(5, d);
  const Tensor kv_src = rand_param(7, d);
  model::MhaWeights w{rand_param(d, d), rand_param(d, d), rand_param(d, d), rand_param(d, d)};
  const Tensor out = model::multi_head_attention(q_src, kv_src, w, 2);

  const auto ref = oracles::mha_ref(oracles::to_matrix(q_src), oracles::to_matrix(kv_src),
                                    oracles::to_matrix(w.wq), oracles::to_matrix(w.wk),
                                    oracles::to_matrix(w.wv), oracles::to_matrix(w.wo), 2);
  ASSERT_EQ(out.rows(), ref.size());
  for (std::size_t r = 0; r < ref.size(); ++r) {
    for (std::size_t c = 0; c < ref[r].size(); ++c) {
      EXPECT_NEAR(out.at(r, c), ref[r][c], 1e-10);
    }
  }
  EXPECT_THROW(model::multi_head_attention(q_src, kv_src, w, 3), pidtc::ParameterError);
}

TEST(BuildInputRows, ScalesPointsAndEncodesAuxTokens) {
  const TrajectorySample s = sample_fixture(3, 1);
  ModelConfig cls = tiny_config(ModelKind::kClassifier);
  const auto rows = model::build_input_rows(cls, s);
  ASSERT_EQ(rows.size(), 54u);
  EXPECT_DOUBLE_EQ(rows[0], s.points[0].x / 1280.0);
  EXPECT_DOUBLE_EQ(rows[1], s.points[0].y / 650.0);
  EXPECT_DOUBLE_EQ(rows[50], s.priors->p1.x / 1280.0);
  EXPECT_DOUBLE_EQ(rows[51], s.priors->p1.y / 650.0);
  EXPECT_DOUBLE_EQ(rows[52], s.priors->p2.x / 1280.0);
  EXPECT_DOUBLE_EQ(rows[53], s.priors->p2.y / 650.0);

  cls.cls_aux = model::ClassifierAux::kZeros;
  const auto zero_rows = model::build_input_rows(cls, s);
  EXPECT_DOUBLE_EQ(zero_rows[50], 0.0);
  EXPECT_DOUBLE_EQ(zero_rows[53], 0.0);

  ModelConfig pred = tiny_config(ModelKind::kPredictor);
  pred.pred_aux = model::PredictorAux::kLabel;
  const auto label_rows = model::build_input_rows(pred, s);
  for (std::size_t i = 50; i < 54; ++i) EXPECT_DOUBLE_EQ(label_rows[i], 1.0);
  const auto override_rows = model::build_input_rows(pred, s, 0);
  for (std::size_t i = 50; i < 54; ++i) EXPECT_DOUBLE_EQ(override_rows[i], 0.0);
}

TEST(BuildInputRows, ReportsMissingInputs) {
  TrajectorySample no_priors = sample_fixture(4, 1);
  no_priors.priors.reset();
  const ModelConfig cls = tiny_config(ModelKind::kClassifier);
  EXPECT_THROW(model::build_input_rows(cls, no_priors), pidtc::ContractError);

  ModelConfig pred = tiny_config(ModelKind::kPredictor);
  pred.pred_aux = model::PredictorAux::kLabel;
  const TrajectorySample unlabeled = sample_fixture(5, std::nullopt);
  EXPECT_THROW(model::build_input_rows(pred, unlabeled), pidtc::ContractError);
  EXPECT_THROW(model::build_input_rows(pred, unlabeled, 2), pidtc::LabelError);
}

TEST(Forward, ZeroWeightsGiveNeutralOutputs) {
  const TrajectorySample s = sample_fixture(6, 1);
  const auto cls = zero_model(tiny_config(ModelKind::kClassifier));
  EXPECT_DOUBLE_EQ(model::classify(cls, s), 0.5);

  const auto pred = zero_model(tiny_config(ModelKind::kPredictor));
  const Point2 p = model::predict_landing(pred, s);
  EXPECT_DOUBLE_EQ(p.x, 0.0);
  EXPECT_DOUBLE_EQ(p.y, 0.0);
}

TEST(Forward, KindGuardsRejectMismatchedWeights) {
  const TrajectorySample s = sample_fixture(7, 1);
  const auto cls = model::init_model(tiny_config(ModelKind::kClassifier), 1);
  const auto pred = model::init_model(tiny_config(ModelKind::kPredictor), 1);
  EXPECT_THROW(model::classify(pred, s), pidtc::ContractError);
  EXPECT_THROW(model::predict_landing(cls, s), pidtc::ContractError);
}

TEST(Forward, ClassifierProbabilityStaysInUnitInterval) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto cls = model::init_model(tiny_config(ModelKind::kClassifier), seed);
    const double p = model::classify(cls, sample_fixture(seed, 0));
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(Forward, DeterministicInEvaluationMode) {
  const auto w = model::init_model(tiny_config(ModelKind::kPredictor), 3);
  const TrajectorySample s = sample_fixture(8, 1);
  const Point2 a = model::predict_landing(w, s);
  const Point2 b = model::predict_landing(w, s);
  EXPECT_DOUBLE_EQ(a.x, b.x);
  EXPECT_DOUBLE_EQ(a.y, b.y);
}

TEST(Cascade, PredictorSeesTheClassifierHardLabel) {
  const auto cls = model::init_model(tiny_config(ModelKind::kClassifier), 2);
  auto pred_cfg = tiny_config(ModelKind::kPredictor);
  pred_cfg.pred_aux = model::PredictorAux::kLabel;
  const auto pred = model::init_model(pred_cfg, 3);
  const TrajectorySample s = sample_fixture(9, std::nullopt);

  const model::CascadeResult r = model::cascade_infer(cls, pred, s);
  EXPECT_EQ(r.label, r.probability >= 0.5 ? 1 : 0);
  const Point2 direct = model::predict_landing(pred, s, r.label);
  EXPECT_DOUBLE_EQ(r.landing.x, direct.x);
  EXPECT_DOUBLE_EQ(r.landing.y, direct.y);
}

TEST(GradCheck, FullClassifierLossAgainstFiniteDifferences) {
  const TrajectorySample s = sample_fixture(10, 1);
  const Tensor label = Tensor::constant({1, 1}, {1.0});
  for (std::uint64_t seed : {1ULL, 2ULL}) {
    auto w = model::init_model(tiny_config(ModelKind::kClassifier), seed);
    const auto ctx = model::make_context(w.config);
    const double err = oracles::max_grad_rel_err(w.trainable(), [&] {
      return num::binary_cross_entropy(model::forward_sample(w, s, ctx), label);
    });
    EXPECT_LE(err, 1e-3) << "seed " << seed;
  }
}

TEST(GradCheck, FullPredictorLossAgainstFiniteDifferences) {
  const TrajectorySample s = sample_fixture(11, 1);
  const Tensor truth = Tensor::constant({1, 2}, {s.landing.x, s.landing.y});
  for (std::uint64_t seed : {1ULL, 2ULL}) {
    auto cfg = tiny_config(ModelKind::kPredictor);
    cfg.pred_aux = model::PredictorAux::kLabel;
    auto w = model::init_model(cfg, seed);
    const auto ctx = model::make_context(w.config);
    const double err = oracles::max_grad_rel_err(w.trainable(), [&] {
      return num::mse_points(model::forward_sample(w, s, ctx), truth);
    });
    EXPECT_LE(err, 1e-3) << "seed " << seed;
  }
}

TEST(Weights, InitIsSeedDeterministic) {
  const auto a = model::init_model(tiny_config(ModelKind::kClassifier), 5);
  const auto b = model::init_model(tiny_config(ModelKind::kClassifier), 5);
  const auto c = model::init_model(tiny_config(ModelKind::kClassifier), 6);
  ASSERT_EQ(a.params.size(), b.params.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    EXPECT_EQ(a.params[i].tensor.values(), b.params[i].tensor.values());
    if (a.params[i].tensor.values() != c.params[i].tensor.values()) any_diff = true;
  }
  EXPECT_TRUE(any_diff);
}

TEST(Weights, MakeModelValidatesLayout) {
  const auto cfg = tiny_config(ModelKind::kClassifier);
  auto w = model::init_model(cfg, 1);
  auto tensors = w.params;
  std::swap(tensors[0], tensors[1]);
  EXPECT_THROW(model::make_model(cfg, tensors), pidtc::CheckpointError);

  auto short_list = w.params;
  short_list.pop_back();
  EXPECT_THROW(model::make_model(cfg, short_list), pidtc::CheckpointError);

  auto bad_shape = w.params;
  bad_shape[0].tensor = Tensor::param({2, 2}, {1, 2, 3, 4});
  EXPECT_THROW(model::make_model(cfg, bad_shape), pidtc::CheckpointError);
}

TEST(Weights, SaveLoadRoundTripPreservesBehavior) {
  const auto dir = std::filesystem::temp_directory_path() / "pidtc_model_rt";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "m.ckpt").string();

  auto cfg = tiny_config(ModelKind::kClassifier);
  const auto w = model::init_model(cfg, 9);
  model::TrainConfig tc;
  tc.epochs = 7;
  tc.seed = 9;
  model::save_model(path, w, tc);
  ASSERT_TRUE(std::filesystem::exists(model::config_record_path(path)));

  const auto [loaded, loaded_tc] = model::load_model(path);
  EXPECT_EQ(loaded.config.kind, cfg.kind);
  EXPECT_EQ(loaded.config.d_model, cfg.d_model);
  EXPECT_EQ(loaded_tc.epochs, 7);
  const TrajectorySample s = sample_fixture(12, 1);
  EXPECT_DOUBLE_EQ(model::classify(loaded, s), model::classify(w, s));
  std::filesystem::remove_all(dir);
}

TEST(ConfigRecord, RoundTripsAndRejectsCorruption) {
  ModelConfig mc = model::predictor_defaults();
  mc.pred_aux = model::PredictorAux::kPriors;
  model::TrainConfig tc;
  tc.epochs = 42;
  tc.lr = 5e-4;
  tc.train_fraction = 0.75;
  const std::string text = model::serialize_model_config(mc, tc);
  const auto [mc2, tc2] = model::parse_model_config(text);
  EXPECT_EQ(model::serialize_model_config(mc2, tc2), text);

  EXPECT_THROW(model::parse_model_config(""), pidtc::CheckpointError);
  EXPECT_THROW(model::parse_model_config("kind=banana\n"), pidtc::CheckpointError);
  EXPECT_THROW(model::parse_model_config(text + "mystery=1\n"), pidtc::CheckpointError);
}

TEST(Split, FractionSplitsAreSeededAndNested) {
  const auto s1 = model::split_indices(10, 0.8, 4);
  EXPECT_EQ(s1.train.size(), 8u);
  EXPECT_EQ(s1.test.size(), 2u);
  const auto s2 = model::split_indices(10, 0.8, 4);
  EXPECT_EQ(s1.train, s2.train);
  EXPECT_EQ(s1.test, s2.test);

  std::vector<char> seen(10, 0);
  for (auto i : s1.train) seen[i] = 1;
  for (auto i : s1.test) seen[i] = 1;
  for (char c : seen) EXPECT_EQ(c, 1);

  EXPECT_THROW(model::split_indices(10, 0.0, 4), pidtc::ParameterError);
  EXPECT_THROW(model::split_indices(10, 1.0, 4), pidtc::ParameterError);
}

TEST(Training, TinyRunIsDeterministicAndTracksBestEpoch) {
  const auto records = small_dataset(12, 21);
  const auto samples = to_samples(records);

  auto cfg = tiny_config(ModelKind::kClassifier);
  model::TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 4;
  tc.seed = 2;
  tc.split_seed = 2;

  const auto a = model::train_classifier(samples, cfg, tc);
  const auto b = model::train_classifier(samples, cfg, tc);
  ASSERT_EQ(a.trace.size(), 3u);
  EXPECT_GE(a.best_epoch, 1);
  EXPECT_LE(a.best_epoch, 3);
  ASSERT_EQ(a.weights.params.size(), b.weights.params.size());
  for (std::size_t i = 0; i < a.weights.params.size(); ++i) {
    EXPECT_EQ(a.weights.params[i].tensor.values(), b.weights.params[i].tensor.values());
  }
  double best = a.trace[0].test_loss;
  for (const auto& row : a.trace) best = std::min(best, row.test_loss);
  EXPECT_DOUBLE_EQ(a.best_test_loss, best);
}

TEST(Training, RejectsEmptyAndKindMismatchedInputs) {
  const auto cfg = tiny_config(ModelKind::kClassifier);
  model::TrainConfig tc;
  tc.epochs = 1;
  EXPECT_THROW(model::train_classifier({}, cfg, tc), pidtc::DataError);
  EXPECT_THROW(model::train_predictor(to_samples(small_dataset(6, 3)), cfg, tc),
               pidtc::ParameterError);
}
