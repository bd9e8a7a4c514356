#ifndef MBTI_NN_CONFIG_HPP_
#define MBTI_NN_CONFIG_HPP_
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace mbti::nn {

/// Shape and regularization of a bidirectional transformer encoder.
struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t hidden_size = 64;
  std::size_t num_layers = 2;
  std::size_t num_heads = 2;
  std::size_t intermediate_size = 256;
  std::size_t max_position_embeddings = 128;
  std::size_t type_vocab_size = 2;
  double dropout = 0.1;
  double attention_dropout = 0.1;
  double layer_norm_eps = 1e-12;
  double initializer_range = 0.02;
  bool case_sensitive = false;
  std::string vocab_ref;
  /// Train only the task head; the embeddings and layers stay fixed.
  bool freeze_encoder = false;

  /// Throws ValidationError when the shape is inconsistent.
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// 2 layers, hidden 64, 2 heads, 128 positions.
EncoderConfig tiny_preset(std::size_t vocab_size);
/// 12 layers, hidden 768, 12 heads, intermediate 3072, dropout 0.1, 512
/// positions: the base-size encoder (about 110M parameters at 30522 tokens).
EncoderConfig paper_preset(std::size_t vocab_size = 30522);
/// Looks up "tiny" or "paper"; throws ValidationError otherwise.
EncoderConfig preset(const std::string& name, std::size_t vocab_size);

/// Parameters of the encoder body (embeddings and layers).
std::size_t encoder_parameter_count(const EncoderConfig& config);
/// Pooler plus the 16-way output layer.
std::size_t classifier_head_parameter_count(const EncoderConfig& config, std::size_t num_labels);

}  // namespace mbti::nn

#endif  // MBTI_NN_CONFIG_HPP_
