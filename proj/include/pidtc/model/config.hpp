#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pidtc/data.hpp"
#include "pidtc/errors.hpp"
#include "pidtc/textio.hpp"

namespace pidtc::model {

enum class ModelKind { kClassifier, kPredictor };

// Content of the auxiliary (decoder-side) tokens. "Zeros" keeps the token
// shape but nulls the information, isolating its contribution in ablations.
enum class ClassifierAux { kPriors, kZeros };
enum class PredictorAux { kLabel, kPriors, kZeros };

// Where the predictor's label token comes from during training: the dataset
// label (teacher forcing) or a trained classifier's prediction.
enum class LabelSource { kGroundTruth, kCascade };

struct ModelConfig {
  ModelKind kind = ModelKind::kClassifier;
  int d_model = 64;
  int heads = 2;
  int ff_dim = 256;
  int embed = 128;  // input-adapter hidden width, reused by the decode head
  ClassifierAux cls_aux = ClassifierAux::kPriors;
  PredictorAux pred_aux = PredictorAux::kLabel;

  // Always two auxiliary decoder tokens: a scalar condition (label) is
  // duplicated across both so every aux variant shares one token shape and
  // therefore one parameter count.
  int aux_tokens() const { return 2; }
  int total_tokens() const { return kTrajectoryLength + aux_tokens(); }
  int output_dim() const { return kind == ModelKind::kClassifier ? 1 : 2; }
  // The classifier decoder carries a feed-forward sublayer; the predictor's
  // does not, which keeps its parameter count in the intended band at the
  // default widths.
  bool decoder_has_ff() const { return kind == ModelKind::kClassifier; }

  void validate() const {
    if (d_model <= 0 || heads <= 0 || ff_dim <= 0 || embed <= 0) {
      throw ParameterError("model config: widths and head count must be positive");
    }
    if (d_model % heads != 0) {
      throw ParameterError("model config: d_model " + std::to_string(d_model) +
                           " is not divisible by " + std::to_string(heads) + " heads");
    }
  }
};

inline ModelConfig classifier_defaults() {
  ModelConfig c;
  c.kind = ModelKind::kClassifier;
  c.d_model = 64;
  c.heads = 2;
  c.ff_dim = 256;
  c.embed = 128;
  return c;
}

inline ModelConfig predictor_defaults() {
  ModelConfig c;
  c.kind = ModelKind::kPredictor;
  c.d_model = 512;
  c.heads = 2;
  c.ff_dim = 2048;
  c.embed = 500;
  return c;
}

struct TrainConfig {
  int epochs = 500;
  int batch_size = 10;
  double lr = 1e-4;
  double dropout = 0.1;
  std::uint64_t seed = 1;
  std::uint64_t split_seed = 1;
  double train_fraction = 0.8;
  std::size_t train_subset = 0;  // 0 = whole train split, else first N of it
  LabelSource label_source = LabelSource::kGroundTruth;

  void validate() const {
    if (epochs < 0) throw ParameterError("train config: epochs must be >= 0");
    if (batch_size <= 0) throw ParameterError("train config: batch size must be positive");
    if (!(lr > 0.0)) throw ParameterError("train config: learning rate must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw ParameterError("train config: dropout must lie in [0, 1)");
    if (!(train_fraction > 0.0) || train_fraction >= 1.0) {
      throw ParameterError("train config: train fraction must lie in (0, 1)");
    }
  }
};

inline std::string kind_name(ModelKind k) {
  return k == ModelKind::kClassifier ? "classifier" : "predictor";
}

inline std::string aux_name(const ModelConfig& c) {
  if (c.kind == ModelKind::kClassifier) {
    return c.cls_aux == ClassifierAux::kPriors ? "priors" : "zeros";
  }
  switch (c.pred_aux) {
    case PredictorAux::kLabel: return "label";
    case PredictorAux::kPriors: return "priors";
    default: return "zeros";
  }
}

inline std::string label_source_name(LabelSource s) {
  return s == LabelSource::kGroundTruth ? "gt" : "cascade";
}

// Plain-text companion record for a checkpoint: key=value per line, fixed
// order so identical configs serialize identically.
inline std::string serialize_model_config(const ModelConfig& mc, const TrainConfig& tc) {
  std::string out;
  out += "kind=" + kind_name(mc.kind) + "\n";
  out += "d_model=" + std::to_string(mc.d_model) + "\n";
  out += "heads=" + std::to_string(mc.heads) + "\n";
  out += "ff_dim=" + std::to_string(mc.ff_dim) + "\n";
  out += "embed=" + std::to_string(mc.embed) + "\n";
  out += "aux=" + aux_name(mc) + "\n";
  out += "epochs=" + std::to_string(tc.epochs) + "\n";
  out += "batch=" + std::to_string(tc.batch_size) + "\n";
  out += "lr=" + format_double(tc.lr) + "\n";
  out += "dropout=" + format_double(tc.dropout) + "\n";
  out += "seed=" + std::to_string(tc.seed) + "\n";
  out += "split_seed=" + std::to_string(tc.split_seed) + "\n";
  out += "train_fraction=" + format_double(tc.train_fraction) + "\n";
  out += "train_subset=" + std::to_string(tc.train_subset) + "\n";
  out += "label_source=" + label_source_name(tc.label_source) + "\n";
  return out;
}

inline std::pair<ModelConfig, TrainConfig> parse_model_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw CheckpointError("config record line " + std::to_string(line_no) +
                            ": expected key=value, got `" + line + "`");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto take = [&kv](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw CheckpointError("config record: missing key `" + key + "`");
    const std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto to_int = [](const std::string& key, const std::string& v) {
    try {
      return parse_int(v, 0);
    } catch (const ParseError&) {
      throw CheckpointError("config record: key `" + key + "` has invalid value `" + v + "`");
    }
  };
  auto to_u64 = [](const std::string& key, const std::string& v) {
    try {
      return parse_u64(v, 0);
    } catch (const ParseError&) {
      throw CheckpointError("config record: key `" + key + "` has invalid value `" + v + "`");
    }
  };
  auto to_double = [](const std::string& key, const std::string& v) {
    try {
      return parse_double(v, 0);
    } catch (const ParseError&) {
      throw CheckpointError("config record: key `" + key + "` has invalid value `" + v + "`");
    }
  };

  ModelConfig mc;
  const std::string kind = take("kind");
  if (kind == "classifier") {
    mc.kind = ModelKind::kClassifier;
  } else if (kind == "predictor") {
    mc.kind = ModelKind::kPredictor;
  } else {
    throw CheckpointError("config record: unknown kind `" + kind + "`");
  }
  mc.d_model = to_int("d_model", take("d_model"));
  mc.heads = to_int("heads", take("heads"));
  mc.ff_dim = to_int("ff_dim", take("ff_dim"));
  mc.embed = to_int("embed", take("embed"));
  const std::string aux = take("aux");
  if (mc.kind == ModelKind::kClassifier) {
    if (aux == "priors") {
      mc.cls_aux = ClassifierAux::kPriors;
    } else if (aux == "zeros") {
      mc.cls_aux = ClassifierAux::kZeros;
    } else {
      throw CheckpointError("config record: unknown classifier aux `" + aux + "`");
    }
  } else {
    if (aux == "label") {
      mc.pred_aux = PredictorAux::kLabel;
    } else if (aux == "priors") {
      mc.pred_aux = PredictorAux::kPriors;
    } else if (aux == "zeros") {
      mc.pred_aux = PredictorAux::kZeros;
    } else {
      throw CheckpointError("config record: unknown predictor aux `" + aux + "`");
    }
  }

  TrainConfig tc;
  tc.epochs = to_int("epochs", take("epochs"));
  tc.batch_size = to_int("batch", take("batch"));
  tc.lr = to_double("lr", take("lr"));
  tc.dropout = to_double("dropout", take("dropout"));
  tc.seed = to_u64("seed", take("seed"));
  tc.split_seed = to_u64("split_seed", take("split_seed"));
  tc.train_fraction = to_double("train_fraction", take("train_fraction"));
  tc.train_subset = static_cast<std::size_t>(to_u64("train_subset", take("train_subset")));
  const std::string src = take("label_source");
  if (src == "gt") {
    tc.label_source = LabelSource::kGroundTruth;
  } else if (src == "cascade") {
    tc.label_source = LabelSource::kCascade;
  } else {
    throw CheckpointError("config record: unknown label source `" + src + "`");
  }
  if (!kv.empty()) {
    throw CheckpointError("config record: unknown key `" + kv.begin()->first + "`");
  }
  mc.validate();
  return {mc, tc};
}

}  // namespace pidtc::model
