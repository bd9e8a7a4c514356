#ifndef MBTI_REPORT_HPP_
#define MBTI_REPORT_HPP_
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mbti/classifier.hpp"
#include "mbti/evaluator.hpp"
#include "mbti/langgen.hpp"

namespace mbti {

/// What is needed to reproduce a report: the hash of the run configuration
/// and every seed that fed into it. No timestamps, so that reruns compare
/// byte for byte.
struct Provenance {
  std::string config_hash;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<std::pair<std::string, std::string>> inputs;  // name, sha256
};

/// Decimal rendering without exponent or trailing zeros: 1e-5 -> "0.00001".
std::string plain_decimal(double v);

// Learn. Rate | Max Seq. | Epochs | Acc.
std::string grid_markdown(std::span<const GridRow> rows);
std::string grid_csv(std::span<const GridRow> rows);

// At least 1..4 matches, then E/I | N/S | F/T | P/J.
std::string metrics_markdown(const MetricsReport& report);
std::string metrics_csv(const MetricsReport& report);

// Type | Loss | Type | Loss, extraverts left, introverts right, followed by
// the group means and per-type corpus sizes.
std::string loss_markdown(const LossTable& table);
std::string loss_csv(const LossTable& table);

std::string provenance_markdown(const Provenance& p);

struct ReportInputs {
  std::optional<std::vector<GridRow>> grid;
  std::optional<MetricsReport> metrics;
  std::optional<LossTable> losses;
  Provenance provenance;
};

struct RenderedReport {
  std::string markdown;
  std::map<std::string, std::string> csv;  // file name -> contents
};

RenderedReport emit_report(const ReportInputs& inputs);

}  // namespace mbti

#endif  // MBTI_REPORT_HPP_
