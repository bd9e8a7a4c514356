#ifndef MBTI_EVALUATOR_HPP_
#define MBTI_EVALUATOR_HPP_
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mbti/core.hpp"

namespace mbti {

struct PredictionRecord {
  MbtiType predicted;
  MbtiType actual;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

/// Raised when the counting identities fail to hold, which can only be a bug.
class InternalError : public Error {
 public:
  using Error::Error;
};

/// Integer tallies from which every metric is derived. Partial tallies merge
/// by addition.
struct MatchCounts {
  std::uint64_t records = 0;
  std::array<std::uint64_t, 5> by_matches{};  // records with exactly m matches
  std::array<std::uint64_t, 4> axis_hits{};

  void add(const PredictionRecord& r) noexcept;
  MatchCounts& operator+=(const MatchCounts& other) noexcept;

  /// Records with at least k matches, k in 1..4.
  [[nodiscard]] std::uint64_t at_least(int k) const;
  [[nodiscard]] std::uint64_t total_matches() const noexcept;

  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

MatchCounts count_matches(std::span<const PredictionRecord> records) noexcept;

struct MetricsReport {
  double exact_accuracy = 0;
  std::array<double, 4> at_least_k{};     // index k-1
  std::array<double, 4> axis_accuracy{};  // canonical axis order
  double expected_matches = 0;
  std::size_t n_records = 0;
  MatchCounts counts;
};

// All of these throw ValidationError on an empty record set.
double exact_accuracy(std::span<const PredictionRecord> records);
double at_least_k_accuracy(std::span<const PredictionRecord> records, int k);
double axis_accuracy(std::span<const PredictionRecord> records, const Axis& axis);
double expected_matches(std::span<const PredictionRecord> records);

/// Full metric family. Checks, in integer arithmetic, that the sum over k of
/// at-least-k counts and the sum of per-axis hits both equal the total
/// number of matching letters, and that at-least-k is nonincreasing.
MetricsReport metrics_report(std::span<const PredictionRecord> records);
MetricsReport metrics_report(const MatchCounts& counts);

/// Sums of published at-least-k and per-axis figures, for checking them
/// against a published expected-match value.
struct PublishedIdentity {
  double at_least_sum = 0;
  double axis_sum = 0;
  bool holds = false;
};
PublishedIdentity check_published_identity(const std::array<double, 4>& at_least_k,
                                           const std::array<double, 4>& axis_accuracy,
                                           double expected_matches, double tolerance);

/// JSONL `{"pred": "INTP", "true": "INTJ"}` per line.
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);
void save_predictions(std::span<const PredictionRecord> records, const std::filesystem::path& path);

}  // namespace mbti

#endif  // MBTI_EVALUATOR_HPP_
