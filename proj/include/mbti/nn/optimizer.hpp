#ifndef MBTI_NN_OPTIMIZER_HPP_
#define MBTI_NN_OPTIMIZER_HPP_
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mbti/nn/tensor.hpp"

namespace mbti::nn {

/// Number of warmup steps: ceil(proportion * total).
inline std::size_t warmup_steps(std::size_t total_steps, double warmup_proportion) {
  return static_cast<std::size_t>(
      std::ceil(warmup_proportion * static_cast<double>(total_steps) - 1e-9));
}

/// Linear warmup then linear decay.
///
/// With W warmup steps the rate is lr/W at step 0 and rises linearly to lr at
/// step W; it then falls linearly and would reach 0 at step `total_steps`, one
/// past the last update.
inline double warmup_linear(std::size_t step, std::size_t total_steps, double warmup_proportion,
                            double max_lr) {
  if (step >= total_steps) return 0.0;
  const std::size_t w = warmup_steps(total_steps, warmup_proportion);
  if (w > 0 && step < w) {
    const double wd = static_cast<double>(w);
    const double start = 1.0 / wd;
    return max_lr * (start + (1.0 - start) * static_cast<double>(step) / wd);
  }
  return max_lr * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - w);
}

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-6;
  double weight_decay = 0.01;
  /// Per-tensor gradient norm clip; non-positive disables clipping.
  double max_grad_norm = 1.0;
};

/// Adam with decoupled weight decay and no bias correction, as used for
/// fine-tuning BERT-family encoders. Biases and layer-norm parameters are
/// exempt from decay.
template <typename Scalar>
class BertAdam {
 public:
  explicit BertAdam(AdamOptions options = {}) : options_(options) {}

  /// Applies one update with learning rate `lr`. `params` and `grads` must
  /// be visited in the same order on every call.
  template <typename Weights>
  void step(Weights& params, const Weights& grads, double lr, bool (*trainable)(const std::string&) = nullptr) {
    std::vector<const Matrix<Scalar>*> g;
    grads.visit([&g](const std::string&, const Matrix<Scalar>& m) { g.push_back(&m); });
    std::size_t i = 0;
    params.visit([&](const std::string& name, Matrix<Scalar>& p) {
      const Matrix<Scalar>& grad = *g[i];
      if (state_.size() <= i) state_.push_back({Matrix<Scalar>::Zero(p.rows(), p.cols()),
                                                Matrix<Scalar>::Zero(p.rows(), p.cols())});
      auto& [m, v] = state_[i];
      ++i;
      if (trainable != nullptr && !trainable(name)) return;
      Scalar clip = 1;
      if (options_.max_grad_norm > 0) {
        const double norm = static_cast<double>(grad.norm());
        if (norm > options_.max_grad_norm) clip = static_cast<Scalar>(options_.max_grad_norm / norm);
      }
      const auto b1 = static_cast<Scalar>(options_.beta1);
      const auto b2 = static_cast<Scalar>(options_.beta2);
      m = b1 * m + (Scalar(1) - b1) * clip * grad;
      v = b2 * v + (Scalar(1) - b2) * (clip * grad).cwiseAbs2();
      Matrix<Scalar> update =
          (m.array() / (v.array().sqrt() + static_cast<Scalar>(options_.epsilon))).matrix();
      if (decays(name)) update += static_cast<Scalar>(options_.weight_decay) * p;
      p -= static_cast<Scalar>(lr) * update;
    });
  }

  static bool decays(const std::string& name) {
    const auto ends = [&name](std::string_view s) {
      return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
    };
    return !(ends(".bias") || ends(".gamma") || ends(".beta"));
  }

 private:
  AdamOptions options_;
  std::vector<std::pair<Matrix<Scalar>, Matrix<Scalar>>> state_;
};

}  // namespace mbti::nn

#endif  // MBTI_NN_OPTIMIZER_HPP_
