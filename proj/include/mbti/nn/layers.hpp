#ifndef MBTI_NN_LAYERS_HPP_
#define MBTI_NN_LAYERS_HPP_
#pragma once

#include <string>

#include "mbti/nn/tensor.hpp"

// Building blocks with explicit forward/backward passes. Backward functions
// accumulate (+=) into a gradient structure of the same shape as the weights.
namespace mbti::nn {

template <typename Scalar>
struct Linear {
  Matrix<Scalar> weight;  // in x out
  Matrix<Scalar> bias;    // 1 x out

  static Linear init(Index in, Index out, double stddev, std::mt19937_64& rng) {
    return {normal_matrix<Scalar>(in, out, stddev, rng), Matrix<Scalar>::Zero(1, out)};
  }

  template <typename F>
  void visit(F&& f, const std::string& prefix) {
    f(prefix + ".weight", weight);
    f(prefix + ".bias", bias);
  }
  template <typename F>
  void visit(F&& f, const std::string& prefix) const {
    f(prefix + ".weight", weight);
    f(prefix + ".bias", bias);
  }

  [[nodiscard]] Matrix<Scalar> forward(const Matrix<Scalar>& x) const {
    Matrix<Scalar> y(x.rows(), weight.cols());
    y.noalias() = x * weight;
    y.rowwise() += bias.row(0);
    return y;
  }

  /// Returns dL/dx given the layer input `x` and dL/dy.
  Matrix<Scalar> backward(const Matrix<Scalar>& x, const Matrix<Scalar>& dy, Linear& grad) const {
    grad.weight.noalias() += x.transpose() * dy;
    grad.bias += dy.colwise().sum();
    Matrix<Scalar> dx(dy.rows(), weight.rows());
    dx.noalias() = dy * weight.transpose();
    return dx;
  }
};

template <typename Scalar>
struct LayerNorm {
  Matrix<Scalar> gamma;  // 1 x n
  Matrix<Scalar> beta;   // 1 x n

  struct Cache {
    Matrix<Scalar> normalized;
    Vector<Scalar> inv_std;
  };

  static LayerNorm init(Index n) {
    return {Matrix<Scalar>::Ones(1, n), Matrix<Scalar>::Zero(1, n)};
  }

  template <typename F>
  void visit(F&& f, const std::string& prefix) {
    f(prefix + ".gamma", gamma);
    f(prefix + ".beta", beta);
  }
  template <typename F>
  void visit(F&& f, const std::string& prefix) const {
    f(prefix + ".gamma", gamma);
    f(prefix + ".beta", beta);
  }

  Matrix<Scalar> forward(const Matrix<Scalar>& x, double eps, Cache* cache) const {
    const Index n = x.cols();
    const Vector<Scalar> mean = x.rowwise().mean();
    Matrix<Scalar> centered = x - mean.replicate(1, n);
    const Vector<Scalar> var = centered.cwiseAbs2().rowwise().sum() / static_cast<Scalar>(n);
    const Vector<Scalar> inv_std =
        (var.array() + static_cast<Scalar>(eps)).rsqrt().matrix();
    Matrix<Scalar> normalized = centered.array().colwise() * inv_std.array();
    Matrix<Scalar> y = normalized.array().rowwise() * gamma.row(0).array();
    y.rowwise() += beta.row(0);
    if (cache != nullptr) {
      cache->normalized = std::move(normalized);
      cache->inv_std = inv_std;
    }
    return y;
  }

  Matrix<Scalar> backward(const Cache& cache, const Matrix<Scalar>& dy, LayerNorm& grad) const {
    const Index n = dy.cols();
    grad.gamma += dy.cwiseProduct(cache.normalized).colwise().sum();
    grad.beta += dy.colwise().sum();
    const Matrix<Scalar> dnorm = dy.array().rowwise() * gamma.row(0).array();
    const Vector<Scalar> mean_d = dnorm.rowwise().mean();
    const Vector<Scalar> mean_dx =
        dnorm.cwiseProduct(cache.normalized).rowwise().sum() / static_cast<Scalar>(n);
    Matrix<Scalar> dx = dnorm - mean_d.replicate(1, n) -
                        cache.normalized.cwiseProduct(mean_dx.replicate(1, n));
    return dx.array().colwise() * cache.inv_std.array();
  }
};

/// Exact (erf-based) GELU.
template <typename Scalar>
Matrix<Scalar> gelu(const Matrix<Scalar>& x) {
  const Scalar inv_sqrt2 = static_cast<Scalar>(0.70710678118654752440);
  return x.unaryExpr([inv_sqrt2](Scalar v) {
    return static_cast<Scalar>(0.5) * v * (Scalar(1) + std::erf(v * inv_sqrt2));
  });
}

template <typename Scalar>
Matrix<Scalar> gelu_backward(const Matrix<Scalar>& x, const Matrix<Scalar>& dy) {
  const Scalar inv_sqrt2 = static_cast<Scalar>(0.70710678118654752440);
  const Scalar inv_sqrt_2pi = static_cast<Scalar>(0.39894228040143267794);
  const Matrix<Scalar> derivative = x.unaryExpr([=](Scalar v) {
    return static_cast<Scalar>(0.5) * (Scalar(1) + std::erf(v * inv_sqrt2)) +
           v * inv_sqrt_2pi * std::exp(static_cast<Scalar>(-0.5) * v * v);
  });
  return dy.cwiseProduct(derivative);
}

}  // namespace mbti::nn

#endif  // MBTI_NN_LAYERS_HPP_
