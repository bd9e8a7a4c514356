#ifndef MBTI_NN_HEADS_HPP_
#define MBTI_NN_HEADS_HPP_
#pragma once

#include <vector>

#include "mbti/nn/encoder.hpp"

namespace mbti::nn {

/// Encoder with a pooled sequence-classification head: the start token's
/// final state goes through a tanh dense layer, dropout, then the output layer.
template <typename Scalar>
struct ClassifierWeights {
  Encoder<Scalar> encoder;
  Linear<Scalar> pooler;
  Linear<Scalar> classifier;

  template <typename Self, typename F>
  static void visit_impl(Self& self, F&& f, const std::string&) {
    self.encoder.visit(f, "encoder");
    self.pooler.visit(f, "pooler");
    self.classifier.visit(f, "classifier");
  }
  template <typename F>
  void visit(F&& f, const std::string& p = "") { visit_impl(*this, f, p); }
  template <typename F>
  void visit(F&& f, const std::string& p = "") const { visit_impl(*this, f, p); }

  static ClassifierWeights init(const EncoderConfig& cfg, std::size_t num_labels,
                                std::mt19937_64& rng) {
    ClassifierWeights w;
    w.encoder = Encoder<Scalar>::init(cfg, rng);
    const auto h = static_cast<Index>(cfg.hidden_size);
    w.pooler = Linear<Scalar>::init(h, h, cfg.initializer_range, rng);
    w.classifier =
        Linear<Scalar>::init(h, static_cast<Index>(num_labels), cfg.initializer_range, rng);
    return w;
  }
};

/// Returns logits (one row per sequence). When `grad` is given, runs the
/// backward pass for the mean cross-entropy against `labels` and accumulates
/// into it; `loss` receives the mean cross-entropy when labels are given.
template <typename Scalar>
Matrix<Scalar> classifier_forward(const ClassifierWeights<Scalar>& w, const EncoderConfig& cfg,
                                  const PackedBatch& batch, std::mt19937_64* rng,
                                  const std::vector<int>* labels = nullptr,
                                  Scalar* loss = nullptr,
                                  ClassifierWeights<Scalar>* grad = nullptr) {
  typename Encoder<Scalar>::Cache cache;
  const Matrix<Scalar> hidden = w.encoder.forward(batch, cfg, rng, cache);
  Matrix<Scalar> first(static_cast<Index>(batch.size()), hidden.cols());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    first.row(static_cast<Index>(s)) = hidden.row(batch.offsets[s]);
  }
  const Matrix<Scalar> pooled = w.pooler.forward(first).array().tanh().matrix();
  Dropout<Scalar> drop;
  const Matrix<Scalar> dropped = drop.forward(pooled, cfg.dropout, rng);
  Matrix<Scalar> logits = w.classifier.forward(dropped);
  if (labels == nullptr) return logits;

  Matrix<Scalar> d_logits;
  const Scalar value = cross_entropy(logits, *labels, grad ? &d_logits : nullptr);
  if (loss != nullptr) *loss = value;
  if (grad == nullptr) return logits;

  const Matrix<Scalar> d_pooled = drop.backward(w.classifier.backward(dropped, d_logits, grad->classifier));
  const Matrix<Scalar> d_pre =
      d_pooled.cwiseProduct((Scalar(1) - pooled.array().square()).matrix());
  const Matrix<Scalar> d_first = w.pooler.backward(first, d_pre, grad->pooler);
  if (cfg.freeze_encoder) return logits;
  Matrix<Scalar> d_hidden = Matrix<Scalar>::Zero(hidden.rows(), hidden.cols());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    d_hidden.row(batch.offsets[s]) = d_first.row(static_cast<Index>(s));
  }
  w.encoder.backward(d_hidden, batch, cfg, cache, grad->encoder);
  return logits;
}

/// Encoder with a masked-token prediction head. The output projection shares
/// its weights with the word embeddings.
template <typename Scalar>
struct MaskedLmWeights {
  Encoder<Scalar> encoder;
  Linear<Scalar> transform;
  LayerNorm<Scalar> transform_norm;
  Matrix<Scalar> decoder_bias;  // 1 x vocab

  template <typename Self, typename F>
  static void visit_impl(Self& self, F&& f, const std::string&) {
    self.encoder.visit(f, "encoder");
    self.transform.visit(f, "lm_head.transform");
    self.transform_norm.visit(f, "lm_head.norm");
    f("lm_head.decoder.bias", self.decoder_bias);
  }
  template <typename F>
  void visit(F&& f, const std::string& p = "") { visit_impl(*this, f, p); }
  template <typename F>
  void visit(F&& f, const std::string& p = "") const { visit_impl(*this, f, p); }

  static MaskedLmWeights init(const EncoderConfig& cfg, std::mt19937_64& rng) {
    MaskedLmWeights w;
    w.encoder = Encoder<Scalar>::init(cfg, rng);
    const auto h = static_cast<Index>(cfg.hidden_size);
    w.transform = Linear<Scalar>::init(h, h, cfg.initializer_range, rng);
    w.transform_norm = LayerNorm<Scalar>::init(h);
    w.decoder_bias = Matrix<Scalar>::Zero(1, static_cast<Index>(cfg.vocab_size));
    return w;
  }
};

/// Vocabulary logits at the packed rows `rows`. With `targets` given, also
/// computes the mean cross-entropy and (with `grad`) its gradient.
template <typename Scalar>
Matrix<Scalar> masked_lm_forward(const MaskedLmWeights<Scalar>& w, const EncoderConfig& cfg,
                                 const PackedBatch& batch, const std::vector<Index>& rows,
                                 std::mt19937_64* rng, const std::vector<int>* targets = nullptr,
                                 Scalar* loss = nullptr, MaskedLmWeights<Scalar>* grad = nullptr) {
  typename Encoder<Scalar>::Cache cache;
  const Matrix<Scalar> hidden = w.encoder.forward(batch, cfg, rng, cache);
  Matrix<Scalar> selected(static_cast<Index>(rows.size()), hidden.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) selected.row(static_cast<Index>(i)) = hidden.row(rows[i]);
  const Matrix<Scalar> pre = w.transform.forward(selected);
  const Matrix<Scalar> act = gelu(pre);
  typename LayerNorm<Scalar>::Cache norm_cache;
  const Matrix<Scalar> normed = w.transform_norm.forward(act, cfg.layer_norm_eps, &norm_cache);
  Matrix<Scalar> logits(normed.rows(), w.encoder.word_embeddings.rows());
  logits.noalias() = normed * w.encoder.word_embeddings.transpose();
  logits.rowwise() += w.decoder_bias.row(0);
  if (targets == nullptr) return logits;

  Matrix<Scalar> d_logits;
  const Scalar value = cross_entropy(logits, *targets, grad ? &d_logits : nullptr);
  if (loss != nullptr) *loss = value;
  if (grad == nullptr) return logits;

  grad->decoder_bias += d_logits.colwise().sum();
  grad->encoder.word_embeddings.noalias() += d_logits.transpose() * normed;
  Matrix<Scalar> d_normed(normed.rows(), normed.cols());
  d_normed.noalias() = d_logits * w.encoder.word_embeddings;
  const Matrix<Scalar> d_act = w.transform_norm.backward(norm_cache, d_normed, grad->transform_norm);
  const Matrix<Scalar> d_selected =
      w.transform.backward(selected, gelu_backward(pre, d_act), grad->transform);
  if (cfg.freeze_encoder) return logits;
  Matrix<Scalar> d_hidden = Matrix<Scalar>::Zero(hidden.rows(), hidden.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) d_hidden.row(rows[i]) += d_selected.row(static_cast<Index>(i));
  w.encoder.backward(d_hidden, batch, cfg, cache, grad->encoder);
  return logits;
}

}  // namespace mbti::nn

#endif  // MBTI_NN_HEADS_HPP_
