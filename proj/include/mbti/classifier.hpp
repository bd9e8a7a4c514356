#ifndef MBTI_CLASSIFIER_HPP_
#define MBTI_CLASSIFIER_HPP_
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "mbti/core.hpp"
#include "mbti/dataset.hpp"
#include "mbti/evaluator.hpp"
#include "mbti/nn/config.hpp"
#include "mbti/nn/heads.hpp"
#include "mbti/tokenizer.hpp"

namespace mbti {

/// Scalar type used for training and inference.
using Real = float;

/// Raised when training produces a non-finite loss.
class TrainingError : public Error {
 public:
  using Error::Error;
};

struct TrainHyperparams {
  double learning_rate = 1e-5;
  std::size_t max_seq_len = 128;
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  double warmup_proportion = 0.1;
  double weight_decay = 0.01;
  std::uint64_t seed = 42;

  void validate() const;

  friend bool operator==(const TrainHyperparams&, const TrainHyperparams&) = default;
};

/// Fine-tuned encoder plus a 16-way head whose outputs follow `all_types()`.
struct TrainedClassifier {
  nn::EncoderConfig config;
  TrainHyperparams hyperparams;
  nn::ClassifierWeights<Real> weights;
  std::vector<double> per_epoch_loss;
};

struct Prediction {
  MbtiType type;
  std::array<double, kNumTypes> scores{};
};

/// Seeds a fresh head (and encoder). With `pretrained` set, every `encoder.*`
/// tensor is loaded from that weights file; shapes must match `config`.
TrainedClassifier init_model(const nn::EncoderConfig& config, std::uint64_t seed,
                             const std::filesystem::path& pretrained = {});

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Mini-batch fine-tuning with cross-entropy, BertAdam and the warmup-linear
/// schedule. Records the mean training loss of each epoch. Deterministic for a
/// given seed.
TrainedClassifier train(TrainedClassifier model, std::span<const EncodedExample> train_set,
                        const TrainHyperparams& hp, const EpochCallback& on_epoch = {});

/// Inference with dropout disabled. Ties go to the earlier type.
std::vector<Prediction> predict_encoded(const TrainedClassifier& model,
                                        std::span<const EncodedExample> examples);
/// Cleans `text` the same way as the training corpus, then predicts.
Prediction predict(const TrainedClassifier& model, const Vocabulary& vocab, std::string_view text);

std::vector<PredictionRecord> evaluate(const TrainedClassifier& model,
                                       std::span<const EncodedExample> labeled);

struct GridData {
  std::span<const LabeledExample> train;
  std::span<const LabeledExample> test;
  const Vocabulary* vocab = nullptr;
  nn::EncoderConfig encoder;
};

struct GridRow {
  TrainHyperparams hyperparams;
  double exact_accuracy = 0;
  std::vector<double> per_epoch_loss;
};

/// Trains and scores one model per row, in order; each run is seeded from its
/// own row.
std::vector<GridRow> run_grid(std::span<const TrainHyperparams> grid, const GridData& data,
                              const EpochCallback& on_epoch = {});

/// The eight learning-rate / sequence-length / epoch combinations of the
/// published hyperparameter table, with batch size 32, warmup 0.1 and weight
/// decay 0.01.
std::vector<TrainHyperparams> paper_grid(std::uint64_t seed);

}  // namespace mbti

#endif  // MBTI_CLASSIFIER_HPP_
