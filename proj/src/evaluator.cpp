#include "mbti/evaluator.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"
#include "mbti/corpus.hpp"
#include "mbti/util.hpp"

namespace mbti {

namespace {

void require_records(const MatchCounts& c) {
  if (c.records == 0) throw ValidationError("metrics need at least one prediction record");
}

double fraction(std::uint64_t num, std::uint64_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

void MatchCounts::add(const PredictionRecord& r) noexcept {
  ++records;
  int matches = 0;
  for (const Axis& axis : kAxes) {
    const bool hit = r.predicted.letter(axis) == r.actual.letter(axis);
    axis_hits[axis.index] += hit;
    matches += hit;
  }
  ++by_matches[matches];
}

MatchCounts& MatchCounts::operator+=(const MatchCounts& other) noexcept {
  records += other.records;
  for (std::size_t i = 0; i < by_matches.size(); ++i) by_matches[i] += other.by_matches[i];
  for (std::size_t i = 0; i < axis_hits.size(); ++i) axis_hits[i] += other.axis_hits[i];
  return *this;
}

std::uint64_t MatchCounts::at_least(int k) const {
  if (k < 1 || k > 4) throw ValidationError("k must be in 1..4, got " + std::to_string(k));
  std::uint64_t n = 0;
  for (int m = k; m <= 4; ++m) n += by_matches[m];
  return n;
}

std::uint64_t MatchCounts::total_matches() const noexcept {
  std::uint64_t n = 0;
  for (std::size_t m = 1; m < by_matches.size(); ++m) n += m * by_matches[m];
  return n;
}

MatchCounts count_matches(std::span<const PredictionRecord> records) noexcept {
  MatchCounts c;
  for (const auto& r : records) c.add(r);
  return c;
}

double exact_accuracy(std::span<const PredictionRecord> records) {
  const auto c = count_matches(records);
  require_records(c);
  return fraction(c.by_matches[4], c.records);
}

double at_least_k_accuracy(std::span<const PredictionRecord> records, int k) {
  if (k < 1 || k > 4) throw ValidationError("k must be in 1..4, got " + std::to_string(k));
  const auto c = count_matches(records);
  require_records(c);
  return fraction(c.at_least(k), c.records);
}

double axis_accuracy(std::span<const PredictionRecord> records, const Axis& axis) {
  const auto c = count_matches(records);
  require_records(c);
  return fraction(c.axis_hits[axis.index], c.records);
}

double expected_matches(std::span<const PredictionRecord> records) {
  const auto c = count_matches(records);
  require_records(c);
  return fraction(c.total_matches(), c.records);
}

MetricsReport metrics_report(std::span<const PredictionRecord> records) {
  return metrics_report(count_matches(records));
}

MetricsReport metrics_report(const MatchCounts& counts) {
  require_records(counts);
  std::uint64_t at_least_sum = 0;
  std::uint64_t axis_sum = 0;
  for (int k = 1; k <= 4; ++k) at_least_sum += counts.at_least(k);
  for (auto hits : counts.axis_hits) axis_sum += hits;
  const std::uint64_t total = counts.total_matches();
  if (at_least_sum != total || axis_sum != total) {
    throw InternalError("match-count identity violated: sum_k at_least_k = " +
                        std::to_string(at_least_sum) + ", sum of axis hits = " +
                        std::to_string(axis_sum) + ", total matches = " + std::to_string(total));
  }
  for (int k = 1; k < 4; ++k) {
    if (counts.at_least(k) < counts.at_least(k + 1)) throw InternalError("at_least_k increases with k");
  }

  MetricsReport r;
  r.n_records = counts.records;
  r.counts = counts;
  r.exact_accuracy = fraction(counts.by_matches[4], counts.records);
  for (int k = 1; k <= 4; ++k) r.at_least_k[k - 1] = fraction(counts.at_least(k), counts.records);
  for (std::size_t a = 0; a < 4; ++a) r.axis_accuracy[a] = fraction(counts.axis_hits[a], counts.records);
  r.expected_matches = fraction(total, counts.records);
  return r;
}

PublishedIdentity check_published_identity(const std::array<double, 4>& at_least_k,
                                           const std::array<double, 4>& axis_accuracy,
                                           double expected, double tolerance) {
  PublishedIdentity id;
  for (double v : at_least_k) id.at_least_sum += v;
  for (double v : axis_accuracy) id.axis_sum += v;
  bool monotone = true;
  for (std::size_t k = 0; k + 1 < at_least_k.size(); ++k) monotone &= at_least_k[k] >= at_least_k[k + 1];
  id.holds = monotone && std::abs(id.at_least_sum - expected) <= tolerance &&
             std::abs(id.axis_sum - expected) <= tolerance;
  return id;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<PredictionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.is_object() || !j.contains("pred") || !j.contains("true")) {
        throw SchemaError(where + "expected an object with 'pred' and 'true'");
      }
      records.push_back({parse_type(j.at("pred").get<std::string>()),
                         parse_type(j.at("true").get<std::string>())});
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(where + e.what());
    } catch (const SchemaError&) {
      throw;
    } catch (const ValidationError& e) {
      throw SchemaError(where + e.what());
    }
  }
  return records;
}

void save_predictions(std::span<const PredictionRecord> records, const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["pred"] = r.predicted.str();
    j["true"] = r.actual.str();
    out += j.dump();
    out.push_back('\n');
  }
  write_file(path, out);
}

}  // namespace mbti
