#ifndef MBTI_NN_TENSOR_HPP_
#define MBTI_NN_TENSOR_HPP_
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace mbti::nn {

/// Activations are stored one token per row.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

template <typename Scalar>
Matrix<Scalar> normal_matrix(Index rows, Index cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix<Scalar> m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(dist(rng));
  return m;
}

/// Inverted dropout. An empty mask means the layer is the identity.
template <typename Scalar>
struct Dropout {
  Matrix<Scalar> mask;

  template <typename Derived>
  Matrix<Scalar> forward(const Eigen::MatrixBase<Derived>& x, double p, std::mt19937_64* rng) {
    if (rng == nullptr || p <= 0.0) {
      mask.resize(0, 0);
      return x;
    }
    std::bernoulli_distribution keep(1.0 - p);
    const auto scale = static_cast<Scalar>(1.0 / (1.0 - p));
    mask.resize(x.rows(), x.cols());
    for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(*rng) ? scale : Scalar(0);
    return x.cwiseProduct(mask);
  }

  template <typename Derived>
  Matrix<Scalar> backward(const Eigen::MatrixBase<Derived>& dy) const {
    if (mask.size() == 0) return dy;
    return dy.cwiseProduct(mask);
  }
};

/// Row-wise softmax.
template <typename Scalar>
Matrix<Scalar> softmax_rows(const Matrix<Scalar>& logits) {
  Matrix<Scalar> p = logits;
  for (Index r = 0; r < p.rows(); ++r) {
    auto row = p.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return p;
}

/// Backward of `softmax_rows` given its output `p` and the upstream gradient.
template <typename Scalar>
Matrix<Scalar> softmax_rows_backward(const Matrix<Scalar>& p, const Matrix<Scalar>& dp) {
  const Vector<Scalar> dots = p.cwiseProduct(dp).rowwise().sum();
  return p.cwiseProduct(dp - dots.replicate(1, dp.cols()));
}

/// Mean cross-entropy of `logits` against `targets`; writes d(loss)/d(logits).
template <typename Scalar>
Scalar cross_entropy(const Matrix<Scalar>& logits, const std::vector<int>& targets,
                     Matrix<Scalar>* dlogits) {
  const Matrix<Scalar> p = softmax_rows(logits);
  const auto n = static_cast<Scalar>(targets.size());
  Scalar loss = 0;
  for (Index r = 0; r < logits.rows(); ++r) {
    const Scalar max = logits.row(r).maxCoeff();
    const Scalar lse = max + std::log((logits.row(r).array() - max).exp().sum());
    loss += lse - logits(r, targets[static_cast<std::size_t>(r)]);
  }
  if (dlogits != nullptr) {
    *dlogits = p;
    for (Index r = 0; r < logits.rows(); ++r) (*dlogits)(r, targets[static_cast<std::size_t>(r)]) -= 1;
    *dlogits /= n;
  }
  return loss / n;
}

}  // namespace mbti::nn

#endif  // MBTI_NN_TENSOR_HPP_
