#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pidtc/errors.hpp"
#include "pidtc/model/config.hpp"
#include "pidtc/num/checkpoint.hpp"
#include "pidtc/num/tensor.hpp"
#include "pidtc/rng.hpp"

namespace pidtc::model {

using num::NamedTensor;
using num::Shape;
using num::Tensor;

enum class ParamKind { kMatrix, kBias, kGain };

struct ParamSpec {
  std::string name;
  Shape shape;
  ParamKind kind;
};

// Canonical parameter list: one source of truth for initialization order,
// checkpoint layout, and count accounting.
inline std::vector<ParamSpec> parameter_specs(const ModelConfig& c) {
  c.validate();
  const auto flat = static_cast<std::size_t>(c.total_tokens()) * 2;
  const auto d = static_cast<std::size_t>(c.d_model);
  const auto ff = static_cast<std::size_t>(c.ff_dim);
  const auto emb = static_cast<std::size_t>(c.embed);
  const auto head_in = static_cast<std::size_t>(c.aux_tokens()) * d;
  const auto out = static_cast<std::size_t>(c.output_dim());

  std::vector<ParamSpec> specs;
  auto matrix = [&specs](std::string name, std::size_t r, std::size_t cc) {
    specs.push_back({std::move(name), Shape{r, cc}, ParamKind::kMatrix});
  };
  auto bias = [&specs](std::string name, std::size_t n) {
    specs.push_back({std::move(name), Shape{n}, ParamKind::kBias});
  };
  auto norm = [&specs](const std::string& name, std::size_t n) {
    specs.push_back({name + ".gamma", Shape{n}, ParamKind::kGain});
    specs.push_back({name + ".beta", Shape{n}, ParamKind::kBias});
  };
  auto attention = [&matrix, d](const std::string& name) {
    matrix(name + ".wq", d, d);
    matrix(name + ".wk", d, d);
    matrix(name + ".wv", d, d);
    matrix(name + ".wo", d, d);
  };
  auto feed_forward = [&matrix, &bias](const std::string& name, std::size_t w, std::size_t h) {
    matrix(name + ".w1", w, h);
    bias(name + ".b1", h);
    matrix(name + ".w2", h, w);
    bias(name + ".b2", w);
  };

  feed_forward("fen", flat, emb);
  matrix("enc.embed.w", 2, d);
  bias("enc.embed.b", d);
  matrix("dec.embed.w", 2, d);
  bias("dec.embed.b", d);

  attention("enc.self");
  norm("enc.ln1", d);
  feed_forward("enc.ff", d, ff);
  norm("enc.ln2", d);

  attention("dec.self");
  norm("dec.ln1", d);
  attention("dec.cross");
  norm("dec.ln2", d);
  if (c.decoder_has_ff()) {
    feed_forward("dec.ff", d, ff);
    norm("dec.ln3", d);
  }

  matrix("head.w1", head_in, emb);
  bias("head.b1", emb);
  if (c.kind == ModelKind::kClassifier) norm("head.ln", emb);
  matrix("head.w2", emb, out);
  bias("head.b2", out);
  return specs;
}

inline std::size_t parameter_count(const ModelConfig& c) {
  std::size_t total = 0;
  for (const ParamSpec& s : parameter_specs(c)) total += num::shape_size(s.shape);
  return total;
}

struct MhaWeights {
  Tensor wq, wk, wv, wo;
};

struct LayerNormWeights {
  Tensor gamma, beta;
};

struct FfWeights {
  Tensor w1, b1, w2, b2;
};

struct ModelWeights {
  ModelConfig config;
  std::vector<NamedTensor> params;  // canonical order, shared with the views below

  Tensor fen_w1, fen_b1, fen_w2, fen_b2;
  Tensor enc_embed_w, enc_embed_b, dec_embed_w, dec_embed_b;
  MhaWeights enc_self;
  LayerNormWeights enc_ln1;
  FfWeights enc_ff;
  LayerNormWeights enc_ln2;
  MhaWeights dec_self;
  LayerNormWeights dec_ln1;
  MhaWeights dec_cross;
  LayerNormWeights dec_ln2;
  FfWeights dec_ff;        // classifier only
  LayerNormWeights dec_ln3;  // classifier only
  Tensor head_w1, head_b1;
  LayerNormWeights head_ln;  // classifier only
  Tensor head_w2, head_b2;

  std::vector<Tensor> trainable() const {
    std::vector<Tensor> out;
    out.reserve(params.size());
    for (const NamedTensor& p : params) out.push_back(p.tensor);
    return out;
  }
};

namespace detail {

// Binds the typed views onto the ordered parameter list, checking that the
// list layout matches parameter_specs exactly.
inline void bind_views(ModelWeights& w) {
  std::size_t i = 0;
  auto next = [&w, &i](const char* expected) -> Tensor {
    if (i >= w.params.size() || w.params[i].name != expected) {
      throw ContractError("model weights: expected parameter `" + std::string(expected) +
                          "` at index " + std::to_string(i));
    }
    return w.params[i++].tensor;
  };
  auto next_attention = [&next](const std::string& name) {
    MhaWeights m;
    m.wq = next((name + ".wq").c_str());
    m.wk = next((name + ".wk").c_str());
    m.wv = next((name + ".wv").c_str());
    m.wo = next((name + ".wo").c_str());
    return m;
  };
  auto next_norm = [&next](const std::string& name) {
    LayerNormWeights n;
    n.gamma = next((name + ".gamma").c_str());
    n.beta = next((name + ".beta").c_str());
    return n;
  };
  auto next_ff = [&next](const std::string& name) {
    FfWeights f;
    f.w1 = next((name + ".w1").c_str());
    f.b1 = next((name + ".b1").c_str());
    f.w2 = next((name + ".w2").c_str());
    f.b2 = next((name + ".b2").c_str());
    return f;
  };

  FfWeights fen = next_ff("fen");
  w.fen_w1 = fen.w1;
  w.fen_b1 = fen.b1;
  w.fen_w2 = fen.w2;
  w.fen_b2 = fen.b2;
  w.enc_embed_w = next("enc.embed.w");
  w.enc_embed_b = next("enc.embed.b");
  w.dec_embed_w = next("dec.embed.w");
  w.dec_embed_b = next("dec.embed.b");
  w.enc_self = next_attention("enc.self");
  w.enc_ln1 = next_norm("enc.ln1");
  w.enc_ff = next_ff("enc.ff");
  w.enc_ln2 = next_norm("enc.ln2");
  w.dec_self = next_attention("dec.self");
  w.dec_ln1 = next_norm("dec.ln1");
  w.dec_cross = next_attention("dec.cross");
  w.dec_ln2 = next_norm("dec.ln2");
  if (w.config.decoder_has_ff()) {
    w.dec_ff = next_ff("dec.ff");
    w.dec_ln3 = next_norm("dec.ln3");
  }
  w.head_w1 = next("head.w1");
  w.head_b1 = next("head.b1");
  if (w.config.kind == ModelKind::kClassifier) w.head_ln = next_norm("head.ln");
  w.head_w2 = next("head.w2");
  w.head_b2 = next("head.b2");
  if (i != w.params.size()) {
    throw ContractError("model weights: " + std::to_string(w.params.size() - i) +
                        " unexpected trailing parameters");
  }
}

}  // namespace detail

// Fresh weights: matrices uniform in ±sqrt(1/fan_in), biases zero, norm gains
// one. Draw order is the canonical parameter order, row-major within each.
inline ModelWeights init_model(const ModelConfig& config, std::uint64_t seed) {
  ModelWeights w;
  w.config = config;
  Rng rng(seed, 0);
  for (const ParamSpec& spec : parameter_specs(config)) {
    const std::size_t n = num::shape_size(spec.shape);
    std::vector<double> values(n, 0.0);
    switch (spec.kind) {
      case ParamKind::kMatrix: {
        const double bound = std::sqrt(1.0 / static_cast<double>(spec.shape[0]));
        for (double& v : values) v = rng.uniform(-bound, bound);
        break;
      }
      case ParamKind::kBias:
        break;
      case ParamKind::kGain:
        values.assign(n, 1.0);
        break;
    }
    w.params.push_back({spec.name, Tensor::param(spec.shape, std::move(values))});
  }
  detail::bind_views(w);
  return w;
}

// Rebuilds a model from checkpoint tensors, validating the layout.
inline ModelWeights make_model(const ModelConfig& config, std::vector<NamedTensor> tensors) {
  const std::vector<ParamSpec> specs = parameter_specs(config);
  if (tensors.size() != specs.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(tensors.size()) +
                          " tensors, model expects " + std::to_string(specs.size()));
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (tensors[i].name != specs[i].name) {
      throw CheckpointError("checkpoint tensor " + std::to_string(i) + " is `" + tensors[i].name +
                            "`, model expects `" + specs[i].name + "`");
    }
    if (tensors[i].tensor.shape() != specs[i].shape) {
      throw CheckpointError("checkpoint tensor `" + tensors[i].name + "` has shape " +
                            num::shape_str(tensors[i].tensor.shape()) + ", model expects " +
                            num::shape_str(specs[i].shape));
    }
  }
  ModelWeights w;
  w.config = config;
  w.params = std::move(tensors);
  detail::bind_views(w);
  return w;
}

// Checkpoint plus its plain-text config record at `<path>.config.txt`.
inline std::string config_record_path(const std::string& ckpt_path) {
  return ckpt_path + ".config.txt";
}

inline void save_model(const std::string& path, const ModelWeights& w, const TrainConfig& tc) {
  num::save_checkpoint(path, w.params);
  write_text_file(config_record_path(path), serialize_model_config(w.config, tc));
}

inline std::pair<ModelWeights, TrainConfig> load_model(const std::string& path) {
  const auto [config, train_cfg] = parse_model_config(read_text_file(config_record_path(path)));
  return {make_model(config, num::load_checkpoint(path)), train_cfg};
}

}  // namespace pidtc::model
