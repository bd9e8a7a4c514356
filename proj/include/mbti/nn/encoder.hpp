#ifndef MBTI_NN_ENCODER_HPP_
#define MBTI_NN_ENCODER_HPP_
#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mbti/dataset.hpp"
#include "mbti/nn/config.hpp"
#include "mbti/nn/layers.hpp"

namespace mbti::nn {

/// Variable-length sequences stacked row-wise. Padding is never materialized:
/// padded keys are masked out of attention anyway, so dropping them leaves
/// every real position's output unchanged.
struct PackedBatch {
  std::vector<TokenId> token_ids;
  std::vector<Index> offsets;
  std::vector<Index> lengths;

  [[nodiscard]] Index rows() const noexcept { return static_cast<Index>(token_ids.size()); }
  [[nodiscard]] std::size_t size() const noexcept { return offsets.size(); }

  void add(std::span<const TokenId> ids) {
    offsets.push_back(rows());
    lengths.push_back(static_cast<Index>(ids.size()));
    token_ids.insert(token_ids.end(), ids.begin(), ids.end());
  }
};

inline PackedBatch pack(std::span<const EncodedExample> data, std::span<const std::size_t> indices) {
  PackedBatch batch;
  for (std::size_t i : indices) {
    const auto& e = data[i];
    batch.add(std::span<const TokenId>(e.token_ids).first(e.length()));
  }
  return batch;
}

template <typename Scalar>
struct EncoderLayer {
  Linear<Scalar> query, key, value, attention_output;
  LayerNorm<Scalar> attention_norm;
  Linear<Scalar> intermediate, output;
  LayerNorm<Scalar> output_norm;

  template <typename Self, typename F>
  static void visit_impl(Self& self, F&& f, const std::string& p) {
    self.query.visit(f, p + ".attention.query");
    self.key.visit(f, p + ".attention.key");
    self.value.visit(f, p + ".attention.value");
    self.attention_output.visit(f, p + ".attention.output");
    self.attention_norm.visit(f, p + ".attention.norm");
    self.intermediate.visit(f, p + ".intermediate");
    self.output.visit(f, p + ".output");
    self.output_norm.visit(f, p + ".output.norm");
  }
  template <typename F>
  void visit(F&& f, const std::string& p) { visit_impl(*this, f, p); }
  template <typename F>
  void visit(F&& f, const std::string& p) const { visit_impl(*this, f, p); }

  struct Cache {
    Matrix<Scalar> input, q, k, v, context;
    std::vector<Matrix<Scalar>> probs;
    std::vector<Dropout<Scalar>> prob_dropout;
    Dropout<Scalar> attention_dropout;
    typename LayerNorm<Scalar>::Cache attention_norm;
    Matrix<Scalar> attended;  // output of attention_norm
    Matrix<Scalar> pre_activation, activation;
    Dropout<Scalar> output_dropout;
    typename LayerNorm<Scalar>::Cache output_norm;
  };

  Matrix<Scalar> forward(const Matrix<Scalar>& x, const PackedBatch& batch, const EncoderConfig& cfg,
                         std::mt19937_64* rng, Cache& c) const {
    const auto heads = static_cast<Index>(cfg.num_heads);
    const Index head_dim = x.cols() / heads;
    const auto scale = static_cast<Scalar>(1.0 / std::sqrt(static_cast<double>(head_dim)));
    c.input = x;
    c.q = query.forward(x);
    c.k = key.forward(x);
    c.v = value.forward(x);
    c.context.setZero(x.rows(), x.cols());
    c.probs.assign(batch.size() * cfg.num_heads, {});
    c.prob_dropout.assign(batch.size() * cfg.num_heads, {});
    for (std::size_t s = 0; s < batch.size(); ++s) {
      const Index o = batch.offsets[s];
      const Index n = batch.lengths[s];
      for (Index h = 0; h < heads; ++h) {
        const std::size_t slot = s * cfg.num_heads + static_cast<std::size_t>(h);
        Matrix<Scalar> scores(n, n);
        scores.noalias() = c.q.block(o, h * head_dim, n, head_dim) *
                           c.k.block(o, h * head_dim, n, head_dim).transpose();
        scores *= scale;
        c.probs[slot] = softmax_rows(scores);
        const Matrix<Scalar> dropped =
            c.prob_dropout[slot].forward(c.probs[slot], cfg.attention_dropout, rng);
        c.context.block(o, h * head_dim, n, head_dim).noalias() =
            dropped * c.v.block(o, h * head_dim, n, head_dim);
      }
    }
    Matrix<Scalar> residual =
        x + c.attention_dropout.forward(attention_output.forward(c.context), cfg.dropout, rng);
    c.attended = attention_norm.forward(residual, cfg.layer_norm_eps, &c.attention_norm);
    c.pre_activation = intermediate.forward(c.attended);
    c.activation = gelu(c.pre_activation);
    residual = c.attended +
               c.output_dropout.forward(output.forward(c.activation), cfg.dropout, rng);
    return output_norm.forward(residual, cfg.layer_norm_eps, &c.output_norm);
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& dy, const PackedBatch& batch,
                          const EncoderConfig& cfg, const Cache& c, EncoderLayer& g) const {
    const auto heads = static_cast<Index>(cfg.num_heads);
    const Index head_dim = dy.cols() / heads;
    const auto scale = static_cast<Scalar>(1.0 / std::sqrt(static_cast<double>(head_dim)));

    const Matrix<Scalar> d_residual2 = output_norm.backward(c.output_norm, dy, g.output_norm);
    const Matrix<Scalar> d_activation =
        output.backward(c.activation, c.output_dropout.backward(d_residual2), g.output);
    Matrix<Scalar> d_attended = d_residual2;
    d_attended += intermediate.backward(c.attended, gelu_backward(c.pre_activation, d_activation),
                                        g.intermediate);

    const Matrix<Scalar> d_residual1 =
        attention_norm.backward(c.attention_norm, d_attended, g.attention_norm);
    const Matrix<Scalar> d_context = attention_output.backward(
        c.context, c.attention_dropout.backward(d_residual1), g.attention_output);

    Matrix<Scalar> dq = Matrix<Scalar>::Zero(dy.rows(), dy.cols());
    Matrix<Scalar> dk = Matrix<Scalar>::Zero(dy.rows(), dy.cols());
    Matrix<Scalar> dv = Matrix<Scalar>::Zero(dy.rows(), dy.cols());
    for (std::size_t s = 0; s < batch.size(); ++s) {
      const Index o = batch.offsets[s];
      const Index n = batch.lengths[s];
      for (Index h = 0; h < heads; ++h) {
        const std::size_t slot = s * cfg.num_heads + static_cast<std::size_t>(h);
        const Matrix<Scalar>& probs = c.probs[slot];
        const Dropout<Scalar>& drop = c.prob_dropout[slot];
        const Matrix<Scalar> dropped = drop.mask.size() ? probs.cwiseProduct(drop.mask) : probs;
        const Matrix<Scalar> d_ctx = d_context.block(o, h * head_dim, n, head_dim);
        dv.block(o, h * head_dim, n, head_dim).noalias() = dropped.transpose() * d_ctx;
        Matrix<Scalar> d_dropped(n, n);
        d_dropped.noalias() = d_ctx * c.v.block(o, h * head_dim, n, head_dim).transpose();
        Matrix<Scalar> d_scores = softmax_rows_backward(probs, drop.backward(d_dropped));
        d_scores *= scale;
        dq.block(o, h * head_dim, n, head_dim).noalias() =
            d_scores * c.k.block(o, h * head_dim, n, head_dim);
        dk.block(o, h * head_dim, n, head_dim).noalias() =
            d_scores.transpose() * c.q.block(o, h * head_dim, n, head_dim);
      }
    }
    Matrix<Scalar> dx = d_residual1;
    dx += query.backward(c.input, dq, g.query);
    dx += key.backward(c.input, dk, g.key);
    dx += value.backward(c.input, dv, g.value);
    return dx;
  }
};

template <typename Scalar>
struct Encoder {
  Matrix<Scalar> word_embeddings;      // vocab x hidden
  Matrix<Scalar> position_embeddings;  // positions x hidden
  Matrix<Scalar> token_type_embeddings;
  LayerNorm<Scalar> embedding_norm;
  std::vector<EncoderLayer<Scalar>> layers;

  template <typename Self, typename F>
  static void visit_impl(Self& self, F&& f, const std::string& p) {
    f(p + ".embeddings.word", self.word_embeddings);
    f(p + ".embeddings.position", self.position_embeddings);
    f(p + ".embeddings.token_type", self.token_type_embeddings);
    self.embedding_norm.visit(f, p + ".embeddings.norm");
    for (std::size_t i = 0; i < self.layers.size(); ++i) {
      self.layers[i].visit(f, p + ".layer." + std::to_string(i));
    }
  }
  template <typename F>
  void visit(F&& f, const std::string& p) { visit_impl(*this, f, p); }
  template <typename F>
  void visit(F&& f, const std::string& p) const { visit_impl(*this, f, p); }

  static Encoder init(const EncoderConfig& cfg, std::mt19937_64& rng) {
    cfg.validate();
    const auto h = static_cast<Index>(cfg.hidden_size);
    const auto inter = static_cast<Index>(cfg.intermediate_size);
    const double sd = cfg.initializer_range;
    Encoder e;
    e.word_embeddings = normal_matrix<Scalar>(static_cast<Index>(cfg.vocab_size), h, sd, rng);
    e.word_embeddings.row(Vocabulary::kPad).setZero();
    e.position_embeddings =
        normal_matrix<Scalar>(static_cast<Index>(cfg.max_position_embeddings), h, sd, rng);
    e.token_type_embeddings =
        normal_matrix<Scalar>(static_cast<Index>(cfg.type_vocab_size), h, sd, rng);
    e.embedding_norm = LayerNorm<Scalar>::init(h);
    for (std::size_t i = 0; i < cfg.num_layers; ++i) {
      EncoderLayer<Scalar> layer;
      layer.query = Linear<Scalar>::init(h, h, sd, rng);
      layer.key = Linear<Scalar>::init(h, h, sd, rng);
      layer.value = Linear<Scalar>::init(h, h, sd, rng);
      layer.attention_output = Linear<Scalar>::init(h, h, sd, rng);
      layer.attention_norm = LayerNorm<Scalar>::init(h);
      layer.intermediate = Linear<Scalar>::init(h, inter, sd, rng);
      layer.output = Linear<Scalar>::init(inter, h, sd, rng);
      layer.output_norm = LayerNorm<Scalar>::init(h);
      e.layers.push_back(std::move(layer));
    }
    return e;
  }

  struct Cache {
    typename LayerNorm<Scalar>::Cache embedding_norm;
    Dropout<Scalar> embedding_dropout;
    std::vector<typename EncoderLayer<Scalar>::Cache> layers;
  };

  /// Final hidden states, one row per packed token. `rng == nullptr` means
  /// inference: dropout is disabled.
  Matrix<Scalar> forward(const PackedBatch& batch, const EncoderConfig& cfg, std::mt19937_64* rng,
                         Cache& cache) const {
    Matrix<Scalar> x(batch.rows(), word_embeddings.cols());
    for (std::size_t s = 0; s < batch.size(); ++s) {
      if (batch.lengths[s] > position_embeddings.rows()) {
        throw ValidationError("sequence longer than the position table");
      }
      for (Index t = 0; t < batch.lengths[s]; ++t) {
        const Index row = batch.offsets[s] + t;
        x.row(row) = word_embeddings.row(batch.token_ids[static_cast<std::size_t>(row)]) +
                     position_embeddings.row(t) + token_type_embeddings.row(0);
      }
    }
    x = embedding_norm.forward(x, cfg.layer_norm_eps, &cache.embedding_norm);
    x = cache.embedding_dropout.forward(x, cfg.dropout, rng);
    cache.layers.resize(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
      x = layers[i].forward(x, batch, cfg, rng, cache.layers[i]);
    }
    return x;
  }

  void backward(const Matrix<Scalar>& dy, const PackedBatch& batch, const EncoderConfig& cfg,
                const Cache& cache, Encoder& grad) const {
    Matrix<Scalar> d = dy;
    for (std::size_t i = layers.size(); i-- > 0;) {
      d = layers[i].backward(d, batch, cfg, cache.layers[i], grad.layers[i]);
    }
    d = cache.embedding_dropout.backward(d);
    d = embedding_norm.backward(cache.embedding_norm, d, grad.embedding_norm);
    for (std::size_t s = 0; s < batch.size(); ++s) {
      for (Index t = 0; t < batch.lengths[s]; ++t) {
        const Index row = batch.offsets[s] + t;
        grad.word_embeddings.row(batch.token_ids[static_cast<std::size_t>(row)]) += d.row(row);
        grad.position_embeddings.row(t) += d.row(row);
      }
    }
    grad.token_type_embeddings.row(0) += d.colwise().sum();
  }
};

/// Copy of `weights` with every parameter set to zero.
template <typename Weights>
Weights zeros_like(const Weights& weights) {
  Weights out = weights;
  out.visit([](const std::string&, auto& m) { m.setZero(); }, "");
  return out;
}

template <typename Weights>
std::size_t parameter_count(const Weights& weights) {
  std::size_t n = 0;
  weights.visit([&n](const std::string&, const auto& m) { n += static_cast<std::size_t>(m.size()); },
                "");
  return n;
}

}  // namespace mbti::nn

#endif  // MBTI_NN_ENCODER_HPP_
