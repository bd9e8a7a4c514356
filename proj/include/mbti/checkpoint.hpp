#ifndef MBTI_CHECKPOINT_HPP_
#define MBTI_CHECKPOINT_HPP_
#pragma once

#include <filesystem>

#include "json.hpp"
#include "mbti/classifier.hpp"
#include "mbti/langgen.hpp"
#include "mbti/nn/config.hpp"
#include "mbti/tokenizer.hpp"

namespace mbti {

namespace nn {
void to_json(nlohmann::json& j, const EncoderConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, EncoderConfig& c);
}  // namespace nn

void to_json(nlohmann::json& j, const TrainHyperparams& hp);
void from_json(const nlohmann::json& j, TrainHyperparams& hp);
void to_json(nlohmann::json& j, const LmHyperparams& hp);
void from_json(const nlohmann::json& j, LmHyperparams& hp);

// A checkpoint is a directory:
//   config.json        encoder config, hyperparameters, vocabulary reference
//   weights.bin        tensors by name
//   vocab.txt          one token per line
//   loss_history.csv   epoch,loss
// Language-model checkpoints add "type_label", "final_loss" and
// "corpus_size" to config.json.

struct ClassifierCheckpoint {
  TrainedClassifier model;
  Vocabulary vocab;
};

struct LmCheckpoint {
  LmBundle bundle;
  Vocabulary vocab;
};

void save_checkpoint(const TrainedClassifier& model, const Vocabulary& vocab,
                     const std::filesystem::path& dir);
ClassifierCheckpoint load_classifier(const std::filesystem::path& dir);

void save_checkpoint(const LmBundle& bundle, const Vocabulary& vocab, const std::filesystem::path& dir);
LmCheckpoint load_lm(const std::filesystem::path& dir);

}  // namespace mbti

#endif  // MBTI_CHECKPOINT_HPP_
