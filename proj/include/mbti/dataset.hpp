#ifndef MBTI_DATASET_HPP_
#define MBTI_DATASET_HPP_
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mbti/core.hpp"
#include "mbti/tokenizer.hpp"

namespace mbti {

struct LabeledExample {
  std::string text;
  MbtiType label;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// Fixed-length model input: [CLS] pieces... [SEP] followed by zero padding.
struct EncodedExample {
  std::vector<TokenId> token_ids;
  std::vector<std::uint8_t> attention_mask;
  int label_id = -1;

  /// Number of non-pad positions, i.e. the index just past [SEP].
  [[nodiscard]] std::size_t length() const noexcept;

  friend bool operator==(const EncodedExample&, const EncodedExample&) = default;
};

struct Split {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> test;
};

/// Stratified split: each label is shuffled under `seed` and divided
/// independently, with the train share rounded up. Each side keeps the input
/// order. Throws ValidationError if the input is empty or any present label
/// has fewer than two examples.
Split split_corpus(std::span<const LabeledExample> examples, double train_fraction,
                   std::uint64_t seed);
/// The same split expressed as a per-example flag (true = train).
std::vector<bool> split_mask(std::span<const MbtiType> labels, double train_fraction,
                             std::uint64_t seed);

/// Wraps already-tokenized pieces. Keeps the first `max_seq_len - 2` pieces.
EncodedExample encode_ids(std::span<const TokenId> pieces, std::size_t max_seq_len,
                          int label_id = -1);
EncodedExample encode(std::string_view text, const Vocabulary& vocab, std::size_t max_seq_len);
EncodedExample encode(const LabeledExample& example, const Vocabulary& vocab,
                      std::size_t max_seq_len);
std::vector<EncodedExample> encode_all(std::span<const LabeledExample> examples,
                                       const Vocabulary& vocab, std::size_t max_seq_len);

/// Yields shuffled index batches covering `0..size-1` exactly once; the last
/// batch may be short.
class BatchSampler {
 public:
  BatchSampler(std::size_t size, std::size_t batch_size, std::uint64_t shuffle_seed);

  std::optional<std::vector<std::size_t>> next();
  [[nodiscard]] std::size_t num_batches() const noexcept;

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_size_;
  std::size_t cursor_ = 0;
};

}  // namespace mbti

#endif  // MBTI_DATASET_HPP_
