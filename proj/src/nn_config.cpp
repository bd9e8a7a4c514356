#include "mbti/nn/config.hpp"

#include "mbti/core.hpp"
#include "mbti/tokenizer.hpp"

namespace mbti::nn {

void EncoderConfig::validate() const {
  const auto fail = [](const std::string& what) { throw ValidationError("encoder config: " + what); };
  if (vocab_size < static_cast<std::size_t>(Vocabulary::kNumReserved)) fail("vocab_size too small");
  if (num_layers < 1) fail("num_layers must be at least 1");
  if (hidden_size < 1 || num_heads < 1 || hidden_size % num_heads != 0) {
    fail("hidden_size must be a positive multiple of num_heads");
  }
  if (intermediate_size < 1) fail("intermediate_size must be positive");
  if (max_position_embeddings < 3) fail("max_position_embeddings must be at least 3");
  if (type_vocab_size < 1) fail("type_vocab_size must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (!(attention_dropout >= 0.0 && attention_dropout < 1.0)) fail("attention_dropout must be in [0, 1)");
  if (!(layer_norm_eps > 0.0)) fail("layer_norm_eps must be positive");
}

EncoderConfig tiny_preset(std::size_t vocab_size) {
  EncoderConfig c;
  c.vocab_size = vocab_size;
  c.hidden_size = 64;
  c.num_layers = 2;
  c.num_heads = 2;
  c.intermediate_size = 256;
  c.max_position_embeddings = 128;
  return c;
}

EncoderConfig paper_preset(std::size_t vocab_size) {
  EncoderConfig c;
  c.vocab_size = vocab_size;
  c.hidden_size = 768;
  c.num_layers = 12;
  c.num_heads = 12;
  c.intermediate_size = 3072;
  c.max_position_embeddings = 512;
  c.dropout = 0.1;
  c.attention_dropout = 0.1;
  return c;
}

EncoderConfig preset(const std::string& name, std::size_t vocab_size) {
  if (name == "tiny") return tiny_preset(vocab_size);
  if (name == "paper") return paper_preset(vocab_size);
  throw ValidationError("unknown preset '" + name + "' (expected tiny or paper)");
}

std::size_t encoder_parameter_count(const EncoderConfig& c) {
  const std::size_t h = c.hidden_size;
  const std::size_t i = c.intermediate_size;
  const std::size_t embeddings = (c.vocab_size + c.max_position_embeddings + c.type_vocab_size) * h + 2 * h;
  const std::size_t layer = 4 * (h * h + h) + 2 * h + (h * i + i) + (i * h + h) + 2 * h;
  return embeddings + c.num_layers * layer;
}

std::size_t classifier_head_parameter_count(const EncoderConfig& c, std::size_t num_labels) {
  const std::size_t h = c.hidden_size;
  return (h * h + h) + (h * num_labels + num_labels);
}

}  // namespace mbti::nn
