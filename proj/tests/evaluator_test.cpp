#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "doctest.h"
#include "mbti/evaluator.hpp"
#include "mbti/util.hpp"

using namespace mbti;

namespace {

std::vector<PredictionRecord> random_records(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> type(0, 15);
  std::vector<PredictionRecord> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({all_types()[type(rng)], all_types()[type(rng)]});
  return out;
}

// Direct counts from the four-letter strings.
struct Oracle {
  double exact = 0;
  std::array<double, 4> at_least{};
  std::array<double, 4> axis{};
  double expected = 0;
};

Oracle oracle(const std::vector<PredictionRecord>& records) {
  Oracle o;
  std::array<std::size_t, 4> at_least{};
  std::array<std::size_t, 4> axis{};
  std::size_t exact = 0;
  std::size_t letters = 0;
  for (const auto& r : records) {
    const auto p = r.predicted.str();
    const auto t = r.actual.str();
    int m = 0;
    for (int i = 0; i < 4; ++i) {
      if (p[i] == t[i]) {
        ++m;
        ++axis[i];
      }
    }
    for (int k = 1; k <= m; ++k) ++at_least[k - 1];
    exact += p == t;
    letters += m;
  }
  const auto n = static_cast<double>(records.size());
  o.exact = exact / n;
  for (int i = 0; i < 4; ++i) {
    o.at_least[i] = at_least[i] / n;
    o.axis[i] = axis[i] / n;
  }
  o.expected = letters / n;
  return o;
}

}  // namespace

TEST_CASE("metrics agree with direct counting") {
  std::mt19937_64 rng(2019);
  std::uniform_int_distribution<std::size_t> size(1, 400);
  for (int trial = 0; trial < 200; ++trial) {
    const auto records = random_records(rng, size(rng));
    const auto o = oracle(records);
    const auto m = metrics_report(records);
    CHECK(m.exact_accuracy == o.exact);
    CHECK(exact_accuracy(records) == o.exact);
    CHECK(m.expected_matches == o.expected);
    CHECK(expected_matches(records) == o.expected);
    for (int k = 1; k <= 4; ++k) {
      CHECK(m.at_least_k[k - 1] == o.at_least[k - 1]);
      CHECK(at_least_k_accuracy(records, k) == o.at_least[k - 1]);
      CHECK(axis_accuracy(records, kAxes[k - 1]) == o.axis[k - 1]);
    }
    CHECK(m.at_least_k[3] == m.exact_accuracy);
    CHECK(m.n_records == records.size());
  }
}

TEST_CASE("the two sums equal the expected number of matching letters") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> size(1, 300);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = metrics_report(random_records(rng, size(rng)));
    double at_least_sum = 0;
    double axis_sum = 0;
    for (int k = 0; k < 4; ++k) {
      at_least_sum += m.at_least_k[k];
      axis_sum += m.axis_accuracy[k];
    }
    CHECK(std::abs(at_least_sum - m.expected_matches) <= 1e-12);
    CHECK(std::abs(axis_sum - m.expected_matches) <= 1e-12);
    CHECK(m.counts.total_matches() == m.counts.at_least(1) + m.counts.at_least(2) + m.counts.at_least(3) +
                                          m.counts.at_least(4));
    for (int k = 1; k < 4; ++k) CHECK(m.at_least_k[k - 1] >= m.at_least_k[k]);
  }
}

TEST_CASE("partial counts merge") {
  std::mt19937_64 rng(9);
  const auto records = random_records(rng, 500);
  MatchCounts merged = count_matches(std::span(records).first(123));
  merged += count_matches(std::span(records).subspan(123));
  CHECK(merged == count_matches(records));
}

TEST_CASE("published tables satisfy the identity") {
  const std::array<double, 4> at_least{0.9813, 0.8573, 0.6606, 0.4797};
  const std::array<double, 4> axis{0.7583, 0.7441, 0.7575, 0.7190};
  const auto id = check_published_identity(at_least, axis, 2.9789, 1e-4);
  CHECK(id.holds);
  CHECK(id.at_least_sum == doctest::Approx(2.9789).epsilon(1e-9));
  CHECK(id.axis_sum == doctest::Approx(2.9789).epsilon(1e-9));
  CHECK_FALSE(check_published_identity(at_least, axis, 3.0, 1e-4).holds);
  CHECK_FALSE(check_published_identity({0.5, 0.6, 0.4, 0.3}, axis, 1.8, 1.0).holds);
}

TEST_CASE("uniform guessing matches two letters on average") {
  // Each letter agrees with probability 1/2, so the mean is 2 with variance 1.
  std::mt19937_64 rng(123);
  const auto records = random_records(rng, 100000);
  const auto m = metrics_report(records);
  CHECK(std::abs(m.expected_matches - 2.0) <= 0.02);
  CHECK(std::abs(m.exact_accuracy - 1.0 / 16) <= 4 * std::sqrt((1.0 / 16) * (15.0 / 16) / 100000));
  // Binomial(4, 1/2): at least k matches with probability 15/16, 11/16, 5/16, 1/16.
  const std::array<double, 4> expected{15.0 / 16, 11.0 / 16, 5.0 / 16, 1.0 / 16};
  for (int k = 0; k < 4; ++k) CHECK(std::abs(m.at_least_k[k] - expected[k]) < 0.01);
}

TEST_CASE("contract errors") {
  const std::vector<PredictionRecord> none;
  CHECK_THROWS_AS(exact_accuracy(none), ValidationError);
  CHECK_THROWS_AS(expected_matches(none), ValidationError);
  CHECK_THROWS_AS(metrics_report(none), ValidationError);
  const std::vector<PredictionRecord> one{{parse_type("INTJ"), parse_type("INTP")}};
  CHECK_THROWS_AS(at_least_k_accuracy(one, 0), ValidationError);
  CHECK_THROWS_AS(at_least_k_accuracy(one, 5), ValidationError);
  CHECK(at_least_k_accuracy(one, 3) == 1.0);
  CHECK(at_least_k_accuracy(one, 4) == 0.0);
  CHECK(expected_matches(one) == 3.0);
}

TEST_CASE("prediction files") {
  const auto path = std::filesystem::temp_directory_path() / "mbti_predictions.jsonl";
  std::mt19937_64 rng(1);
  const auto records = random_records(rng, 50);
  save_predictions(records, path);
  CHECK(load_predictions(path) == records);
  CHECK(read_file(path).starts_with("{\"pred\":"));

  write_file(path, "{\"pred\":\"INTJ\",\"true\":\"INTP\"}\n{\"pred\":\"INTJ\"}\n");
  CHECK_THROWS_WITH_AS(load_predictions(path), doctest::Contains(":2:"), ValidationError);
  write_file(path, "{\"pred\":\"QQQQ\",\"true\":\"INTP\"}\n");
  CHECK_THROWS_AS(load_predictions(path), ValidationError);
  CHECK_THROWS_AS(load_predictions(path.string() + ".missing"), ValidationError);
}
