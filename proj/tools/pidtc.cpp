#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "pidtc/pidtc.hpp"

namespace fs = std::filesystem;

namespace {

int resolve_threads() {
  const char* env = std::getenv("PIDTC_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  const long long v = pidtc::parse_int(env, 1);
  if (v < 1) throw pidtc::ParameterError("PIDTC_THREADS must be a positive integer");
  return static_cast<int>(v);
}

std::vector<pidtc::TrajectorySample> load_samples(const std::string& path,
                                                  std::vector<fs::path>& manifest_inputs) {
  const std::vector<pidtc::synth::DatasetRecord> records = pidtc::synth::read_dataset(path);
  manifest_inputs.push_back(path);
  std::vector<pidtc::TrajectorySample> samples;
  samples.reserve(records.size());
  for (const auto& r : records) samples.push_back(r.sample);
  return samples;
}

// ---------------------------------------------------------------- gen-data

struct GenDataOpts {
  std::size_t count = 350;
  std::uint64_t seed = 1;
  std::string out;
  double in_ratio = 0.5;
  double noise = 0.5;
};

void run_gen_data(const GenDataOpts& o) {
  pidtc::synth::GeneratorConfig g;
  g.count = o.count;
  g.seed = o.seed;
  g.in_ratio = o.in_ratio;
  g.noise_sd = o.noise;
  g.threads = resolve_threads();
  const pidtc::synth::GeneratedDataset ds = pidtc::synth::generate_dataset(g);
  pidtc::synth::write_dataset(o.out, ds.records);
  const std::string homography_path = o.out + ".homography.txt";
  pidtc::eval::write_homography(homography_path, ds.camera.ground_to_image.inverse());

  pidtc::RunManifest m;
  m.command = "gen-data";
  m.seed = o.seed;
  m.parameters["count"] = o.count;
  m.parameters["seed"] = o.seed;
  m.parameters["out"] = o.out;
  m.parameters["in_ratio"] = o.in_ratio;
  m.parameters["noise"] = o.noise;
  m.outputs = {o.out, homography_path};
  pidtc::write_manifest_for_file(o.out, m);

  std::size_t in_count = 0;
  for (const auto& r : ds.records) in_count += static_cast<std::size_t>(*r.sample.label == 1);
  std::cout << "wrote " << ds.records.size() << " records (" << in_count << " in, "
            << ds.records.size() - in_count << " out) to " << o.out << "\n";
}

// ----------------------------------------------------------- extract-priors

struct ExtractOpts {
  std::string image;
  std::string out;
  double low = 50.0;
  double high = 150.0;
  int min_votes = 80;
};

void run_extract_priors(const ExtractOpts& o) {
  const pidtc::vision::GrayImage img = pidtc::vision::read_pgm(o.image);
  pidtc::vision::PriorExtractionParams params;
  params.canny.low = o.low;
  params.canny.high = o.high;
  params.min_votes = o.min_votes;
  const pidtc::vision::PriorPoints priors = pidtc::vision::extract_priors(img, params);

  std::string content;
  content += pidtc::format_double(priors.p1.x) + " " + pidtc::format_double(priors.p1.y) + "\n";
  content += pidtc::format_double(priors.p2.x) + " " + pidtc::format_double(priors.p2.y) + "\n";
  pidtc::write_text_file(o.out, content);

  pidtc::RunManifest m;
  m.command = "extract-priors";
  m.parameters["image"] = o.image;
  m.parameters["out"] = o.out;
  m.parameters["low"] = o.low;
  m.parameters["high"] = o.high;
  m.parameters["min_votes"] = o.min_votes;
  m.inputs = {o.image};
  m.outputs = {o.out};
  pidtc::write_manifest_for_file(o.out, m);

  std::cout << "corners: (" << pidtc::format_double(priors.p1.x) << ", "
            << pidtc::format_double(priors.p1.y) << ") (" << pidtc::format_double(priors.p2.x)
            << ", " << pidtc::format_double(priors.p2.y) << ")\n";
}

// ------------------------------------------------------- train-cls/train-pred

struct TrainOpts {
  std::string data;
  std::string out;
  int epochs = 500;
  int batch = 10;
  double lr = 1e-4;
  int d_model = 64;
  int heads = 2;
  int ff = 256;
  int embed = 128;
  double dropout = 0.1;
  std::uint64_t seed = 1;
  std::uint64_t split_seed = 1;
  double train_fraction = 0.8;
  std::string label_source = "gt";
  std::string cls;  // classifier checkpoint for cascade label sourcing
};

void run_train(pidtc::model::ModelKind kind, const TrainOpts& o) {
  pidtc::RunManifest m;
  m.command = kind == pidtc::model::ModelKind::kClassifier ? "train-cls" : "train-pred";
  const std::vector<pidtc::TrajectorySample> samples = load_samples(o.data, m.inputs);

  pidtc::model::ModelConfig mc = kind == pidtc::model::ModelKind::kClassifier
                                     ? pidtc::model::classifier_defaults()
                                     : pidtc::model::predictor_defaults();
  mc.d_model = o.d_model;
  mc.heads = o.heads;
  mc.ff_dim = o.ff;
  mc.embed = o.embed;

  pidtc::model::TrainConfig tc;
  tc.epochs = o.epochs;
  tc.batch_size = o.batch;
  tc.lr = o.lr;
  tc.dropout = o.dropout;
  tc.seed = o.seed;
  tc.split_seed = o.split_seed;
  tc.train_fraction = o.train_fraction;
  tc.label_source = o.label_source == "cascade" ? pidtc::model::LabelSource::kCascade
                                                : pidtc::model::LabelSource::kGroundTruth;

  std::optional<pidtc::model::ModelWeights> cascade_cls;
  if (kind == pidtc::model::ModelKind::kPredictor &&
      tc.label_source == pidtc::model::LabelSource::kCascade) {
    if (o.cls.empty()) {
      throw pidtc::ParameterError("--label-source cascade requires --cls CHECKPOINT");
    }
    auto [w, unused_tc] = pidtc::model::load_model(o.cls);
    if (w.config.kind != pidtc::model::ModelKind::kClassifier) {
      throw pidtc::CheckpointError("--cls checkpoint does not hold a classifier");
    }
    cascade_cls = std::move(w);
    m.inputs.push_back(o.cls);
    m.inputs.push_back(pidtc::model::config_record_path(o.cls));
  }

  const pidtc::model::TrainResult result =
      kind == pidtc::model::ModelKind::kClassifier
          ? pidtc::model::train_classifier(samples, mc, tc)
          : pidtc::model::train_predictor(samples, mc, tc,
                                          cascade_cls ? &*cascade_cls : nullptr);

  pidtc::model::save_model(o.out, result.weights, tc);
  const std::string trace_path = o.out + ".trace.csv";
  pidtc::write_text_file(trace_path, pidtc::model::serialize_trace(result.trace));

  m.seed = o.seed;
  m.parameters["data"] = o.data;
  m.parameters["out"] = o.out;
  m.parameters["epochs"] = o.epochs;
  m.parameters["batch"] = o.batch;
  m.parameters["lr"] = o.lr;
  m.parameters["d_model"] = o.d_model;
  m.parameters["heads"] = o.heads;
  m.parameters["ff"] = o.ff;
  m.parameters["embed"] = o.embed;
  m.parameters["dropout"] = o.dropout;
  m.parameters["seed"] = o.seed;
  m.parameters["split_seed"] = o.split_seed;
  m.parameters["train_fraction"] = o.train_fraction;
  if (kind == pidtc::model::ModelKind::kPredictor) {
    m.parameters["label_source"] = o.label_source;
    if (!o.cls.empty()) m.parameters["cls"] = o.cls;
  }
  m.outputs = {o.out, pidtc::model::config_record_path(o.out), trace_path};
  pidtc::write_manifest_for_file(o.out, m);

  std::cout << "best validation loss: " << pidtc::format_double(result.best_test_loss)
            << " (epoch " << result.best_epoch << ")\n";
}

// ----------------------------------------------------------------------- eval

struct EvalOpts {
  std::string data;
  std::string cls;
  std::string pred;
  std::string homography;
  std::string report;
};

void run_eval(const EvalOpts& o) {
  pidtc::RunManifest m;
  m.command = "eval";
  const std::vector<pidtc::TrajectorySample> samples = load_samples(o.data, m.inputs);

  auto [cls_w, cls_tc] = pidtc::model::load_model(o.cls);
  if (cls_w.config.kind != pidtc::model::ModelKind::kClassifier) {
    throw pidtc::CheckpointError("--cls checkpoint does not hold a classifier");
  }
  auto [pred_w, pred_tc] = pidtc::model::load_model(o.pred);
  if (pred_w.config.kind != pidtc::model::ModelKind::kPredictor) {
    throw pidtc::CheckpointError("--pred checkpoint does not hold a predictor");
  }
  const pidtc::eval::Homography image_to_court = pidtc::eval::read_homography(o.homography);
  m.inputs.push_back(o.cls);
  m.inputs.push_back(pidtc::model::config_record_path(o.cls));
  m.inputs.push_back(o.pred);
  m.inputs.push_back(pidtc::model::config_record_path(o.pred));
  m.inputs.push_back(o.homography);

  const std::vector<std::size_t> idx = pidtc::eval::all_indices(samples.size());
  const pidtc::eval::EvalReport cascade =
      pidtc::eval::evaluate_cascade(cls_w, pred_w, samples, idx, &image_to_court);
  const pidtc::eval::EvalReport forced =
      pidtc::eval::evaluate_predictor(pred_w, samples, idx, &image_to_court);

  const std::vector<pidtc::eval::ReportRow> rows = {
      pidtc::eval::report_row("PIDTC", cascade),
      pidtc::eval::report_row("PIDTC-gt", forced),
  };
  const std::string report_text = pidtc::eval::serialize_report(rows);
  pidtc::write_text_file(o.report, report_text);
  const std::string residuals_path = o.report + ".residuals.csv";
  pidtc::write_text_file(residuals_path, pidtc::eval::serialize_residuals(cascade.residuals));

  m.parameters["data"] = o.data;
  m.parameters["cls"] = o.cls;
  m.parameters["pred"] = o.pred;
  m.parameters["homography"] = o.homography;
  m.parameters["report"] = o.report;
  m.outputs = {o.report, residuals_path};
  pidtc::write_manifest_for_file(o.report, m);

  std::cout << report_text;
}

// ------------------------------------------------- ablate / compare / sweep

struct HarnessOpts {
  std::string data;
  std::string out;
  std::string homography;  // empty = use <data>.homography.txt when present
  int cls_epochs = 500;
  int pred_epochs = 1000;
  int cls_d_model = 64;
  int pred_d_model = 512;
  int cls_ff = 256;
  int pred_ff = 2048;
  int cls_embed = 128;
  int pred_embed = 500;
  int heads = 2;
  int batch = 10;
  double lr = 1e-4;
  double dropout = 0.1;
  std::uint64_t seed = 1;
  std::uint64_t split_seed = 1;
  double train_fraction = 0.8;
  int rnn_hidden = 64;
};

pidtc::eval::HarnessConfig harness_config(const HarnessOpts& o) {
  pidtc::eval::HarnessConfig cfg;
  cfg.classifier = pidtc::model::classifier_defaults();
  cfg.classifier.d_model = o.cls_d_model;
  cfg.classifier.heads = o.heads;
  cfg.classifier.ff_dim = o.cls_ff;
  cfg.classifier.embed = o.cls_embed;
  cfg.predictor = pidtc::model::predictor_defaults();
  cfg.predictor.d_model = o.pred_d_model;
  cfg.predictor.heads = o.heads;
  cfg.predictor.ff_dim = o.pred_ff;
  cfg.predictor.embed = o.pred_embed;
  for (auto* tc : {&cfg.classifier_train, &cfg.predictor_train}) {
    tc->batch_size = o.batch;
    tc->lr = o.lr;
    tc->dropout = o.dropout;
    tc->seed = o.seed;
    tc->split_seed = o.split_seed;
    tc->train_fraction = o.train_fraction;
  }
  cfg.classifier_train.epochs = o.cls_epochs;
  cfg.predictor_train.epochs = o.pred_epochs;
  return cfg;
}

void shared_harness_params(pidtc::RunManifest& m, const HarnessOpts& o) {
  m.parameters["data"] = o.data;
  m.parameters["out"] = o.out;
  m.parameters["heads"] = o.heads;
  m.parameters["batch"] = o.batch;
  m.parameters["lr"] = o.lr;
  m.parameters["dropout"] = o.dropout;
  m.parameters["seed"] = o.seed;
  m.parameters["split_seed"] = o.split_seed;
  m.parameters["train_fraction"] = o.train_fraction;
}

void run_harness(const std::string& command, const HarnessOpts& o) {
  pidtc::RunManifest m;
  m.command = command;
  m.seed = o.seed;
  const std::vector<pidtc::TrajectorySample> samples = load_samples(o.data, m.inputs);

  std::optional<pidtc::eval::Homography> image_to_court;
  std::string homography_path = o.homography;
  if (homography_path.empty()) {
    const std::string sidecar = o.data + ".homography.txt";
    if (fs::exists(sidecar)) homography_path = sidecar;
  }
  if (!homography_path.empty()) {
    image_to_court = pidtc::eval::read_homography(homography_path);
    m.inputs.push_back(homography_path);
    m.parameters["homography"] = homography_path;
  }

  const pidtc::eval::HarnessConfig cfg = harness_config(o);
  const fs::path out_dir{o.out};
  const pidtc::eval::Homography* h = image_to_court ? &*image_to_court : nullptr;

  pidtc::eval::HarnessResult result;
  shared_harness_params(m, o);
  if (command == "ablate") {
    m.parameters["cls_epochs"] = o.cls_epochs;
    m.parameters["pred_epochs"] = o.pred_epochs;
    m.parameters["cls_d_model"] = o.cls_d_model;
    m.parameters["pred_d_model"] = o.pred_d_model;
    m.parameters["cls_ff"] = o.cls_ff;
    m.parameters["pred_ff"] = o.pred_ff;
    m.parameters["cls_embed"] = o.cls_embed;
    m.parameters["pred_embed"] = o.pred_embed;
    result = pidtc::eval::run_ablation(samples, cfg, h, &out_dir);
  } else if (command == "compare") {
    m.parameters["epochs"] = o.pred_epochs;
    m.parameters["d_model"] = o.pred_d_model;
    m.parameters["ff"] = o.pred_ff;
    m.parameters["embed"] = o.pred_embed;
    m.parameters["rnn_hidden"] = o.rnn_hidden;
    pidtc::eval::RnnConfig rnn;
    rnn.hidden = o.rnn_hidden;
    result = pidtc::eval::run_compare(samples, cfg, h, &out_dir, rnn);
  } else {
    m.parameters["epochs"] = o.pred_epochs;
    m.parameters["d_model"] = o.pred_d_model;
    m.parameters["ff"] = o.pred_ff;
    m.parameters["embed"] = o.pred_embed;
    result = pidtc::eval::run_sweep(samples, cfg, h, &out_dir);
  }

  m.outputs.assign(result.files.begin(), result.files.end());
  pidtc::write_manifest_for_dir(out_dir, m);
  std::cout << pidtc::eval::serialize_report(result.rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tennis-ball landing point prediction pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pidtc::kVersion);

  GenDataOpts gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic trajectory dataset");
  gen_cmd->add_option("--count", gen.count, "number of records")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "output dataset path")->required();
  gen_cmd->add_option("--in-ratio", gen.in_ratio, "fraction of in-court landings")
      ->capture_default_str();
  gen_cmd->add_option("--noise", gen.noise, "pixel noise standard deviation")
      ->capture_default_str();
  gen_cmd->callback([&gen] { run_gen_data(gen); });

  ExtractOpts ext;
  CLI::App* ext_cmd =
      app.add_subcommand("extract-priors", "extract the two court corners from a PGM image");
  ext_cmd->add_option("--image", ext.image, "input PGM image")->required();
  ext_cmd->add_option("--out", ext.out, "output corner file")->required();
  ext_cmd->add_option("--low", ext.low, "low edge threshold")->capture_default_str();
  ext_cmd->add_option("--high", ext.high, "high edge threshold")->capture_default_str();
  ext_cmd->add_option("--min-votes", ext.min_votes, "line accumulator threshold")
      ->capture_default_str();
  ext_cmd->callback([&ext] { run_extract_priors(ext); });

  TrainOpts cls_train;
  CLI::App* cls_cmd = app.add_subcommand("train-cls", "train the in/out classifier");
  TrainOpts pred_train;
  pred_train.epochs = 1000;
  pred_train.d_model = 512;
  pred_train.ff = 2048;
  pred_train.embed = 500;
  CLI::App* pred_cmd = app.add_subcommand("train-pred", "train the landing-point predictor");
  for (auto& [cmd, opts] : {std::pair<CLI::App*, TrainOpts*>{cls_cmd, &cls_train},
                            std::pair<CLI::App*, TrainOpts*>{pred_cmd, &pred_train}}) {
    cmd->add_option("--data", opts->data, "training dataset")->required();
    cmd->add_option("--out", opts->out, "output checkpoint path")->required();
    cmd->add_option("--epochs", opts->epochs, "training epochs")->capture_default_str();
    cmd->add_option("--batch", opts->batch, "batch size")->capture_default_str();
    cmd->add_option("--lr", opts->lr, "learning rate")->capture_default_str();
    cmd->add_option("--d-model", opts->d_model, "token width")->capture_default_str();
    cmd->add_option("--heads", opts->heads, "attention heads")->capture_default_str();
    cmd->add_option("--ff", opts->ff, "feed-forward width")->capture_default_str();
    cmd->add_option("--embed", opts->embed, "adapter/head hidden width")->capture_default_str();
    cmd->add_option("--dropout", opts->dropout, "dropout rate")->capture_default_str();
    cmd->add_option("--seed", opts->seed, "training seed")->capture_default_str();
    cmd->add_option("--split-seed", opts->split_seed, "train/test split seed")
        ->capture_default_str();
    cmd->add_option("--train-fraction", opts->train_fraction, "train split fraction")
        ->capture_default_str();
  }
  pred_cmd->add_option("--label-source", pred_train.label_source,
                       "label token source: gt or cascade")
      ->check(CLI::IsMember({"gt", "cascade"}))
      ->capture_default_str();
  pred_cmd->add_option("--cls", pred_train.cls, "classifier checkpoint for cascade labels");
  cls_cmd->callback([&cls_train] { run_train(pidtc::model::ModelKind::kClassifier, cls_train); });
  pred_cmd->callback([&pred_train] { run_train(pidtc::model::ModelKind::kPredictor, pred_train); });

  EvalOpts ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate the cascaded pipeline on a dataset");
  eval_cmd->add_option("--data", ev.data, "evaluation dataset")->required();
  eval_cmd->add_option("--cls", ev.cls, "classifier checkpoint")->required();
  eval_cmd->add_option("--pred", ev.pred, "predictor checkpoint")->required();
  eval_cmd->add_option("--homography", ev.homography, "pixel-to-court homography file")
      ->required();
  eval_cmd->add_option("--report", ev.report, "output report CSV")->required();
  eval_cmd->callback([&ev] { run_eval(ev); });

  HarnessOpts ablate;
  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "train and report every classifier/predictor variant");
  HarnessOpts compare;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "compare the predictor against a recurrent baseline");
  HarnessOpts sweep;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "retrain on nested training-set fractions");
  for (auto& [cmd, opts] : {std::pair<CLI::App*, HarnessOpts*>{ablate_cmd, &ablate},
                            std::pair<CLI::App*, HarnessOpts*>{compare_cmd, &compare},
                            std::pair<CLI::App*, HarnessOpts*>{sweep_cmd, &sweep}}) {
    cmd->add_option("--data", opts->data, "labeled dataset")->required();
    cmd->add_option("--out", opts->out, "output directory")->required();
    cmd->add_option("--homography", opts->homography,
                    "pixel-to-court homography (default: dataset sidecar)");
    cmd->add_option("--heads", opts->heads, "attention heads")->capture_default_str();
    cmd->add_option("--batch", opts->batch, "batch size")->capture_default_str();
    cmd->add_option("--lr", opts->lr, "learning rate")->capture_default_str();
    cmd->add_option("--dropout", opts->dropout, "dropout rate")->capture_default_str();
    cmd->add_option("--seed", opts->seed, "training seed")->capture_default_str();
    cmd->add_option("--split-seed", opts->split_seed, "train/test split seed")
        ->capture_default_str();
    cmd->add_option("--train-fraction", opts->train_fraction, "train split fraction")
        ->capture_default_str();
  }
  ablate_cmd->add_option("--cls-epochs", ablate.cls_epochs, "classifier epochs")
      ->capture_default_str();
  ablate_cmd->add_option("--pred-epochs", ablate.pred_epochs, "predictor epochs")
      ->capture_default_str();
  ablate_cmd->add_option("--cls-d-model", ablate.cls_d_model, "classifier token width")
      ->capture_default_str();
  ablate_cmd->add_option("--pred-d-model", ablate.pred_d_model, "predictor token width")
      ->capture_default_str();
  ablate_cmd->add_option("--cls-ff", ablate.cls_ff, "classifier feed-forward width")
      ->capture_default_str();
  ablate_cmd->add_option("--pred-ff", ablate.pred_ff, "predictor feed-forward width")
      ->capture_default_str();
  ablate_cmd->add_option("--cls-embed", ablate.cls_embed, "classifier adapter width")
      ->capture_default_str();
  ablate_cmd->add_option("--pred-embed", ablate.pred_embed, "predictor adapter width")
      ->capture_default_str();
  for (auto& [cmd, opts] : {std::pair<CLI::App*, HarnessOpts*>{compare_cmd, &compare},
                            std::pair<CLI::App*, HarnessOpts*>{sweep_cmd, &sweep}}) {
    cmd->add_option("--epochs", opts->pred_epochs, "training epochs")->capture_default_str();
    cmd->add_option("--d-model", opts->pred_d_model, "token width")->capture_default_str();
    cmd->add_option("--ff", opts->pred_ff, "feed-forward width")->capture_default_str();
    cmd->add_option("--embed", opts->pred_embed, "adapter/head hidden width")
        ->capture_default_str();
  }
  compare_cmd->add_option("--rnn-hidden", compare.rnn_hidden, "baseline hidden width")
      ->capture_default_str();
  ablate_cmd->callback([&ablate] { run_harness("ablate", ablate); });
  compare_cmd->callback([&compare] { run_harness("compare", compare); });
  sweep_cmd->callback([&sweep] { run_harness("sweep", sweep); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const pidtc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
