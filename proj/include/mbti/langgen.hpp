#ifndef MBTI_LANGGEN_HPP_
#define MBTI_LANGGEN_HPP_
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mbti/classifier.hpp"
#include "mbti/core.hpp"
#include "mbti/nn/heads.hpp"
#include "mbti/preprocess.hpp"
#include "mbti/tokenizer.hpp"

namespace mbti {

struct LmHyperparams {
  std::size_t batch_size = 16;
  double learning_rate = 3e-5;
  std::size_t epochs = 10;
  std::size_t max_seq_len = 128;
  double warmup_proportion = 0.1;
  double weight_decay = 0.01;
  double mask_probability = 0.15;
  std::uint64_t seed = 42;

  void validate() const;

  friend bool operator==(const LmHyperparams&, const LmHyperparams&) = default;
};

struct MaskTarget {
  std::size_t sequence;
  std::size_t position;
  TokenId original;

  friend bool operator==(const MaskTarget&, const MaskTarget&) = default;
};

struct MaskedBatch {
  std::vector<std::vector<TokenId>> sequences;
  std::vector<MaskTarget> targets;
};

/// Selects each non-special token with probability `mask_probability`; a
/// selected token becomes [MASK] 80% of the time, a random non-special token
/// 10% of the time, and stays unchanged otherwise. Special tokens are never
/// touched. Deterministic under `seed`.
MaskedBatch mask_for_training(std::span<const std::vector<TokenId>> sequences,
                              double mask_probability, std::size_t vocab_size, std::uint64_t seed);

/// A per-type masked language model and its training history.
struct LmBundle {
  MbtiType type_label = all_types().front();
  nn::EncoderConfig config;
  LmHyperparams hyperparams;
  nn::MaskedLmWeights<Real> weights;
  std::vector<double> per_epoch_loss;
  double final_loss = 0;
  std::size_t corpus_size = 0;
};

LmBundle init_lm(const nn::EncoderConfig& config, MbtiType type_label, std::uint64_t seed);

/// Fine-tunes on one type's documents, which must have been cleaned with case
/// preserved. Records the mean masked-token cross-entropy of each epoch.
LmBundle train_lm(LmBundle bundle, const Vocabulary& vocab, std::span<const CleanDocument> corpus,
                  const LmHyperparams& hp, const EpochCallback& on_epoch = {});

/// Mean masked-token loss on fixed sequences and fixed masks, dropout off.
double masked_lm_loss(const LmBundle& bundle, const MaskedBatch& batch);

struct DecodeConfig {
  enum class Strategy { kGreedy, kTopK };
  Strategy strategy = Strategy::kGreedy;
  std::size_t top_k = 40;
  double temperature = 1.0;
  std::size_t max_new_tokens = 64;
  std::uint64_t seed = 0;

  void validate() const;
};

DecodeConfig::Strategy parse_strategy(std::string_view name);

struct Generation {
  std::string text;               // continuation only
  std::vector<TokenId> token_ids;  // generated pieces
  bool prompt_truncated = false;
  bool stopped_at_separator = false;
};

/// Iterative mask filling: append [MASK] to the context, predict it, keep the
/// prediction, repeat. Stops after `max_new_tokens` pieces or when [SEP] is
/// predicted. When the window is full the oldest context tokens slide out.
/// [PAD], [CLS] and [MASK] are never emitted.
Generation generate(const LmBundle& bundle, const Vocabulary& vocab, std::string_view prompt,
                    const DecodeConfig& cfg);

struct LmSummary {
  MbtiType type = all_types().front();
  double final_loss = 0;
  std::size_t corpus_size = 0;
};

struct LossTable {
  std::array<LmSummary, kNumTypes> rows;  // canonical order
  double extravert_mean = 0;
  double introvert_mean = 0;
};

/// Requires exactly one entry per type.
LossTable loss_table(std::span<const LmSummary> summaries);
LossTable loss_table(std::span<const LmBundle> bundles);

}  // namespace mbti

#endif  // MBTI_LANGGEN_HPP_
