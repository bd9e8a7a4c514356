#ifndef MBTI_TESTS_GRADCHECK_HPP_
#define MBTI_TESTS_GRADCHECK_HPP_
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mbti/nn/heads.hpp"

namespace gradcheck {

using mbti::nn::Index;
using mbti::nn::Matrix;

struct TensorError {
  std::string name;
  double relative = 0;  // |analytic - numeric| / (|analytic| + |numeric|) over the checked entries
  double analytic_norm = 0;
  double numeric_norm = 0;
  std::size_t entries = 0;

  // Key biases shift every attention score of a query equally, so their true
  // gradient is zero; there both sides must be at rounding level instead.
  [[nodiscard]] bool passes(double tolerance) const {
    if (analytic_norm < 1e-12 && numeric_norm < 1e-7) return true;
    return relative <= tolerance;
  }
};

// Compares `analytic` against central differences of `loss(weights)`. Every
// entry of tensors accepted by `full` is perturbed; other tensors get up to
// `sample` randomly chosen entries.
template <typename Weights, typename Loss, typename Full>
std::vector<TensorError> compare(Weights& weights, const Weights& analytic, Loss&& loss, Full&& full,
                                 std::size_t sample, std::uint64_t seed, double h = 1e-5) {
  std::vector<const Matrix<double>*> grads;
  analytic.visit([&grads](const std::string&, const Matrix<double>& m) { grads.push_back(&m); });
  std::mt19937_64 rng(seed);
  std::vector<TensorError> out;
  std::size_t t = 0;
  weights.visit([&](const std::string& name, Matrix<double>& m) {
    const Matrix<double>& g = *grads[t++];
    std::vector<Index> idx(static_cast<std::size_t>(m.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    if (!full(name) && idx.size() > sample) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(sample);
    }
    double diff = 0, a = 0, n = 0;
    for (Index i : idx) {
      const double saved = m.data()[i];
      m.data()[i] = saved + h;
      const double up = loss();
      m.data()[i] = saved - h;
      const double down = loss();
      m.data()[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic_i = g.data()[i];
      diff += (analytic_i - numeric) * (analytic_i - numeric);
      a += analytic_i * analytic_i;
      n += numeric * numeric;
    }
    TensorError e;
    e.name = name;
    e.analytic_norm = std::sqrt(a);
    e.numeric_norm = std::sqrt(n);
    e.entries = idx.size();
    const double denom = std::sqrt(a) + std::sqrt(n);
    e.relative = denom == 0 ? 0 : std::sqrt(diff) / denom;
    out.push_back(e);
  });
  return out;
}

inline mbti::nn::EncoderConfig tiny_config(std::size_t vocab) {
  auto cfg = mbti::nn::tiny_preset(vocab);
  cfg.max_position_embeddings = 16;
  return cfg;
}

inline mbti::nn::PackedBatch fixed_batch(std::size_t vocab) {
  mbti::nn::PackedBatch batch;
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> id(5, static_cast<int>(vocab) - 1);
  for (std::size_t len : {7u, 4u, 11u}) {
    std::vector<mbti::TokenId> ids{2};
    for (std::size_t i = 0; i + 2 < len; ++i) ids.push_back(id(rng));
    ids.push_back(3);
    batch.add(ids);
  }
  return batch;
}

inline bool classifier_head(const std::string& name) {
  return name.starts_with("pooler") || name.starts_with("classifier");
}

inline bool lm_head(const std::string& name) { return name.starts_with("lm_head"); }

// Gradient check of the 16-way classifier with dropout off.
inline std::vector<TensorError> check_classifier(std::size_t encoder_sample = 16) {
  const std::size_t vocab = 40;
  const auto cfg = tiny_config(vocab);
  std::mt19937_64 rng(5);
  auto w = mbti::nn::ClassifierWeights<double>::init(cfg, 16, rng);
  // Larger head weights give gradients well above rounding noise.
  w.classifier.weight *= 10.0;
  w.pooler.weight *= 10.0;
  const auto batch = fixed_batch(vocab);
  const std::vector<int> labels{3, 14, 0};
  auto grad = mbti::nn::zeros_like(w);
  double loss = 0;
  mbti::nn::classifier_forward<double>(w, cfg, batch, nullptr, &labels, &loss, &grad);
  const auto f = [&] {
    double l = 0;
    mbti::nn::classifier_forward<double>(w, cfg, batch, nullptr, &labels, &l);
    return l;
  };
  return compare(w, grad, f, classifier_head, encoder_sample, 17);
}

// Gradient check of the masked-token head with dropout off.
inline std::vector<TensorError> check_masked_lm(std::size_t encoder_sample = 16) {
  const std::size_t vocab = 40;
  const auto cfg = tiny_config(vocab);
  std::mt19937_64 rng(6);
  auto w = mbti::nn::MaskedLmWeights<double>::init(cfg, rng);
  w.transform.weight *= 10.0;
  const auto batch = fixed_batch(vocab);
  const std::vector<Index> rows{1, 3, 8, 12, 15};
  const std::vector<int> targets{7, 22, 5, 39, 11};
  auto grad = mbti::nn::zeros_like(w);
  double loss = 0;
  mbti::nn::masked_lm_forward<double>(w, cfg, batch, rows, nullptr, &targets, &loss, &grad);
  const auto f = [&] {
    double l = 0;
    mbti::nn::masked_lm_forward<double>(w, cfg, batch, rows, nullptr, &targets, &l);
    return l;
  };
  const auto full = [](const std::string& name) { return lm_head(name) || name == "encoder.embeddings.word"; };
  return compare(w, grad, f, full, encoder_sample, 18);
}

// Largest relative error among tensors with a non-vanishing gradient.
inline double max_relative(const std::vector<TensorError>& errors) {
  double worst = 0;
  for (const auto& e : errors) {
    if (e.analytic_norm >= 1e-12 || e.numeric_norm >= 1e-7) worst = std::max(worst, e.relative);
  }
  return worst;
}

inline bool all_pass(const std::vector<TensorError>& errors, double tolerance) {
  return std::all_of(errors.begin(), errors.end(), [tolerance](const TensorError& e) { return e.passes(tolerance); });
}

}  // namespace gradcheck

#endif  // MBTI_TESTS_GRADCHECK_HPP_
