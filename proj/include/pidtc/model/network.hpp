#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pidtc/data.hpp"
#include "pidtc/errors.hpp"
#include "pidtc/model/weights.hpp"
#include "pidtc/num/ops.hpp"
#include "pidtc/rng.hpp"

namespace pidtc::model {

// Sinusoidal table for token positions 0..count-1: column 2i holds
// sin(pos / 10000^(2i/d)), column 2i+1 the matching cosine.
inline Tensor positional_encoding(int count, int d_model) {
  if (count <= 0 || d_model <= 0) {
    throw ParameterError("positional encoding: count and width must be positive");
  }
  const auto n = static_cast<std::size_t>(count);
  const auto d = static_cast<std::size_t>(d_model);
  std::vector<double> values(n * d);
  for (std::size_t pos = 0; pos < n; ++pos) {
    for (std::size_t j = 0; j < d; ++j) {
      const double exponent = static_cast<double>(2 * (j / 2)) / static_cast<double>(d);
      const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
      values[pos * d + j] = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return Tensor::constant({n, d}, std::move(values));
}

// Scaled dot-product attention with single-stage projections: wq/wk/wv/wo are
// all d x d without biases; head h reads the h-th column block of each
// projection. Queries come from q_src, keys and values from kv_src.
inline Tensor multi_head_attention(const Tensor& q_src, const Tensor& kv_src,
                                   const MhaWeights& w, int heads) {
  const std::size_t d = q_src.cols();
  if (heads <= 0 || d % static_cast<std::size_t>(heads) != 0) {
    throw ParameterError("attention: width " + std::to_string(d) + " not divisible by " +
                         std::to_string(heads) + " heads");
  }
  const std::size_t dk = d / static_cast<std::size_t>(heads);
  const Tensor q = num::matmul(q_src, w.wq);
  const Tensor k = num::matmul(kv_src, w.wk);
  const Tensor v = num::matmul(kv_src, w.wv);
  std::vector<Tensor> head_outputs;
  head_outputs.reserve(static_cast<std::size_t>(heads));
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
  for (int h = 0; h < heads; ++h) {
    const std::size_t off = static_cast<std::size_t>(h) * dk;
    const Tensor qh = num::slice_cols(q, off, dk);
    const Tensor kh = num::slice_cols(k, off, dk);
    const Tensor vh = num::slice_cols(v, off, dk);
    const Tensor scores = num::scale(num::matmul(qh, num::transpose(kh)), inv_sqrt_dk);
    head_outputs.push_back(num::matmul(num::softmax_rows(scores), vh));
  }
  return num::matmul(num::concat_cols(head_outputs), w.wo);
}

// Per-forward state: dropout stream and a cached positional table.
struct ForwardContext {
  bool training = false;
  double dropout = 0.0;
  Rng* rng = nullptr;
  Tensor pe;

  Tensor apply_dropout(const Tensor& x) const {
    if (!training || dropout == 0.0) return x;
    if (rng == nullptr) throw ContractError("forward: training dropout requires an rng");
    return num::dropout(x, dropout, *rng, true);
  }
};

inline ForwardContext make_context(const ModelConfig& config, bool training = false,
                                   double dropout = 0.0, Rng* rng = nullptr) {
  ForwardContext ctx;
  ctx.training = training;
  ctx.dropout = dropout;
  ctx.rng = rng;
  ctx.pe = positional_encoding(kTrajectoryLength, config.d_model);
  return ctx;
}

namespace detail {

inline Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  return num::add_row_broadcast(num::matmul(x, w), b);
}

inline Tensor feed_forward(const Tensor& x, const FfWeights& w, const ForwardContext& ctx) {
  const Tensor h = ctx.apply_dropout(num::relu(linear(x, w.w1, w.b1)));
  return linear(h, w.w2, w.b2);
}

inline Tensor add_and_norm(const Tensor& x, const Tensor& sublayer, const LayerNormWeights& ln) {
  return num::layer_norm_rows(num::add(x, sublayer), ln.gamma, ln.beta);
}

}  // namespace detail

// Raw token rows for one sample: 25 trajectory points scaled to [0,1] by the
// image extents, then the auxiliary tokens. Priors are scaled like points;
// the in/out label is replicated raw as (label, label).
inline std::vector<double> build_input_rows(const ModelConfig& config, const TrajectorySample& s,
                                            std::optional<int> label_override = std::nullopt) {
  std::vector<double> rows;
  rows.reserve(static_cast<std::size_t>(config.total_tokens()) * 2);
  for (const Point2& p : s.points) {
    rows.push_back(p.x / kImageWidth);
    rows.push_back(p.y / kImageHeight);
  }
  auto push_priors = [&rows, &s] {
    if (!s.priors) throw ContractError("model input: sample has no prior points");
    for (const Point2& p : {s.priors->p1, s.priors->p2}) {
      rows.push_back(p.x / kImageWidth);
      rows.push_back(p.y / kImageHeight);
    }
  };
  auto push_zeros = [&rows](int tokens) { rows.insert(rows.end(), static_cast<std::size_t>(tokens) * 2, 0.0); };

  if (config.kind == ModelKind::kClassifier) {
    if (config.cls_aux == ClassifierAux::kPriors) {
      push_priors();
    } else {
      push_zeros(2);
    }
  } else {
    switch (config.pred_aux) {
      case PredictorAux::kPriors:
        push_priors();
        break;
      case PredictorAux::kZeros:
        push_zeros(config.aux_tokens());
        break;
      case PredictorAux::kLabel: {
        int label = 0;
        if (label_override) {
          label = *label_override;
        } else if (s.label) {
          label = *s.label;
        } else {
          throw ContractError("model input: sample has no label and no override was given");
        }
        if (label != 0 && label != 1) {
          throw LabelError("model input: label must be 0 or 1, got " + std::to_string(label));
        }
        for (int t = 0; t < config.aux_tokens(); ++t) {
          rows.push_back(static_cast<double>(label));
          rows.push_back(static_cast<double>(label));
        }
        break;
      }
    }
  }
  return rows;
}

// Full forward pass to the head output: (1,1) in-probability for the
// classifier, (1,2) landing point in pixels for the predictor.
inline Tensor forward_sample(const ModelWeights& w, const TrajectorySample& s,
                             const ForwardContext& ctx,
                             std::optional<int> label_override = std::nullopt) {
  const ModelConfig& cfg = w.config;
  const auto n_tok = static_cast<std::size_t>(cfg.total_tokens());
  const auto n_aux = static_cast<std::size_t>(cfg.aux_tokens());
  const auto d = static_cast<std::size_t>(cfg.d_model);

  const Tensor raw = Tensor::constant({n_tok, 2}, build_input_rows(cfg, s, label_override));

  // Input adapter: flatten, expand, contract, re-form tokens. Mixes every
  // coordinate into every token before the streams are split.
  const Tensor flat = num::reshape(raw, {1, n_tok * 2});
  const Tensor mixed = detail::linear(num::relu(detail::linear(flat, w.fen_w1, w.fen_b1)),
                                      w.fen_w2, w.fen_b2);
  const Tensor tokens = num::reshape(mixed, {n_tok, 2});

  const Tensor enc_in = num::slice_rows(tokens, 0, kTrajectoryLength);
  const Tensor dec_in = num::slice_rows(tokens, kTrajectoryLength, n_aux);

  Tensor enc_tok = detail::linear(enc_in, w.enc_embed_w, w.enc_embed_b);
  enc_tok = ctx.apply_dropout(num::add(enc_tok, ctx.pe));
  Tensor dec_tok = ctx.apply_dropout(detail::linear(dec_in, w.dec_embed_w, w.dec_embed_b));

  // Encoder: self-attention and feed-forward sublayers, post-norm residuals.
  Tensor enc = detail::add_and_norm(enc_tok, multi_head_attention(enc_tok, enc_tok, w.enc_self, cfg.heads),
                                    w.enc_ln1);
  enc = detail::add_and_norm(enc, detail::feed_forward(enc, w.enc_ff, ctx), w.enc_ln2);

  // Decoder: self-attention over the aux tokens, then cross-attention into
  // the encoded trajectory.
  Tensor dec = detail::add_and_norm(dec_tok, multi_head_attention(dec_tok, dec_tok, w.dec_self, cfg.heads),
                                    w.dec_ln1);
  dec = detail::add_and_norm(dec, multi_head_attention(dec, enc, w.dec_cross, cfg.heads), w.dec_ln2);
  if (cfg.decoder_has_ff()) {
    dec = detail::add_and_norm(dec, detail::feed_forward(dec, w.dec_ff, ctx), w.dec_ln3);
  }

  const Tensor head_in = num::reshape(dec, {1, n_aux * d});
  if (cfg.kind == ModelKind::kClassifier) {
    const Tensor hidden = num::sigmoid(num::layer_norm_rows(
        detail::linear(head_in, w.head_w1, w.head_b1), w.head_ln.gamma, w.head_ln.beta));
    return num::sigmoid(detail::linear(hidden, w.head_w2, w.head_b2));
  }
  const Tensor hidden = num::relu(detail::linear(head_in, w.head_w1, w.head_b1));
  const Tensor unit = detail::linear(hidden, w.head_w2, w.head_b2);
  return num::mul(unit, Tensor::constant({1, 2}, {static_cast<double>(kImageWidth),
                                                  static_cast<double>(kImageHeight)}));
}

inline double classify(const ModelWeights& w, const TrajectorySample& s) {
  if (w.config.kind != ModelKind::kClassifier) {
    throw ContractError("classify: weights belong to a " + kind_name(w.config.kind));
  }
  return forward_sample(w, s, make_context(w.config)).item();
}

inline Point2 predict_landing(const ModelWeights& w, const TrajectorySample& s,
                              std::optional<int> label_override = std::nullopt) {
  if (w.config.kind != ModelKind::kPredictor) {
    throw ContractError("predict_landing: weights belong to a " + kind_name(w.config.kind));
  }
  const Tensor out = forward_sample(w, s, make_context(w.config), label_override);
  return Point2{out.at(0, 0), out.at(0, 1)};
}

struct CascadeResult {
  double probability = 0.0;
  int label = 0;
  Point2 landing;
};

// The full pipeline: the classifier's hard label conditions the predictor.
inline CascadeResult cascade_infer(const ModelWeights& classifier, const ModelWeights& predictor,
                                   const TrajectorySample& s) {
  CascadeResult r;
  r.probability = classify(classifier, s);
  r.label = r.probability >= 0.5 ? 1 : 0;
  r.landing = predict_landing(predictor, s, r.label);
  return r;
}

}  // namespace pidtc::model
