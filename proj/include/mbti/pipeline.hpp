#ifndef MBTI_PIPELINE_HPP_
#define MBTI_PIPELINE_HPP_
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mbti/classifier.hpp"
#include "mbti/corpus.hpp"
#include "mbti/langgen.hpp"
#include "mbti/nn/config.hpp"

namespace mbti {

/// A post together with its cleaned text, one JSON object per line: the raw
/// corpus fields plus "clean_body".
struct CleanRecord {
  RawPost post;
  std::string clean_body;
};

void save_clean_corpus(std::span<const CleanRecord> records, const std::filesystem::path& path);
/// Throws SchemaError naming the line for records without "clean_body".
std::vector<CleanRecord> load_clean_corpus(const std::filesystem::path& path);

std::vector<CleanRecord> clean_corpus(std::span<const RawPost> posts, bool preserve_case);
std::vector<LabeledExample> labeled_examples(std::span<const CleanRecord> records);

/// Vocabulary for the classifier, learned from the training texts.
Vocabulary classifier_vocabulary(std::span<const CleanRecord> train, std::size_t size, bool lowercase);

/// Sequence of stage names in execution order.
inline constexpr const char* kStageOrder[] = {"scrape", "clean", "split", "train",
                                              "eval",   "grid",  "lm",    "report"};

struct RunConfig {
  std::vector<std::string> stages;
  std::filesystem::path output_dir = "run";
  std::uint64_t seed = 42;
  std::string preset = "tiny";

  // Corpus source for the scrape stage: fixture pages, a live site, or an
  // existing JSONL corpus (ingested as is).
  std::filesystem::path fixtures;
  std::string url_template;
  std::filesystem::path corpus_path;
  std::vector<MbtiType> sections;  // empty = all 16
  ScrapeOptions scrape;

  std::size_t vocab_size = 2000;
  bool lowercase = true;
  double train_fraction = 0.85;

  nlohmann::json encoder_overrides = nlohmann::json::object();
  TrainHyperparams classifier;
  std::vector<TrainHyperparams> grid;  // empty = the published grid
  LmHyperparams lm;
  std::vector<MbtiType> lm_types;  // empty = all 16

  /// Existing prediction file for the eval stage; when set, no model is run.
  std::filesystem::path predictions;

  /// The raw configuration, kept for hashing and for the provenance record.
  nlohmann::json source = nlohmann::json::object();

  /// Parses a JSON run configuration. Relative paths resolve against `base`.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
  static RunConfig load(const std::filesystem::path& path);

  /// sha256 of the configuration with the output directory left out, so the
  /// same experiment hashes the same wherever it is written.
  [[nodiscard]] std::string hash() const;
  [[nodiscard]] std::uint64_t stage_seed(std::string_view stage) const;
  [[nodiscard]] nn::EncoderConfig encoder(std::size_t vocab_size) const;
};

struct PipelineResult {
  int exit_code = 0;  // 0 ok, 1 invalid configuration, 2 stage failure
  std::vector<std::string> ran;
  std::vector<std::string> skipped;
  std::string failed_stage;
  std::string message;
};

/// Runs the requested stages in dependency order. Inputs are checked before
/// any stage starts. A stage whose configuration and input hashes match its
/// last successful run is skipped. A failing stage stops the run; whatever
/// earlier stages wrote is kept.
PipelineResult run_pipeline(const RunConfig& config, std::ostream& log);

}  // namespace mbti

#endif  // MBTI_PIPELINE_HPP_
