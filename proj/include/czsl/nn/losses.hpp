#pragma once

// Loss primitives. Every reduction accumulates in double regardless of the
// scalar type of the operands.

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>

#include "czsl/core/matrix.hpp"
#include "czsl/nn/mlp.hpp"

namespace czsl::nn {

template <typename T>
struct LossGrad {
  double loss = 0.0;
  Matrix<T> grad;
};

template <typename T>
struct KlResult {
  double loss = 0.0;
  Matrix<T> d_mu;
  Matrix<T> d_logvar;
};

// Row-wise softmax with max subtraction.
template <typename T>
Matrix<T> softmax(const Matrix<T>& logits) {
  Matrix<T> out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = static_cast<double>(logits.row(i).maxCoeff());
    double z = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) z += std::exp(static_cast<double>(logits(i, j)) - m);
    for (Eigen::Index j = 0; j < logits.cols(); ++j)
      out(i, j) = static_cast<T>(std::exp(static_cast<double>(logits(i, j)) - m) / z);
  }
  return out;
}

// Vector-Jacobian product of row-wise softmax: p * (g - <g, p>).
template <typename T>
Matrix<T> softmax_backward(const Matrix<T>& probs, const Matrix<T>& d_probs) {
  require_same_shape(probs, d_probs, "softmax_backward");
  Matrix<T> out(probs.rows(), probs.cols());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    double dot = 0.0;
    for (Eigen::Index j = 0; j < probs.cols(); ++j)
      dot += static_cast<double>(d_probs(i, j)) * static_cast<double>(probs(i, j));
    for (Eigen::Index j = 0; j < probs.cols(); ++j)
      out(i, j) = static_cast<T>(static_cast<double>(probs(i, j)) *
                                 (static_cast<double>(d_probs(i, j)) - dot));
  }
  return out;
}

template <typename T>
Matrix<T> one_hot(const Labels& labels, Eigen::Index num_classes) {
  Matrix<T> out = Matrix<T>::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes)
      throw Error("one_hot: label " + std::to_string(labels[i]) + " out of range [0, " +
                  std::to_string(num_classes) + ")");
    out(static_cast<Eigen::Index>(i), labels[i]) = T(1);
  }
  return out;
}

/// Mean over the batch of -log softmax(logits)[label]; gradient (softmax - onehot)/B.
template <typename T>
LossGrad<T> softmax_cross_entropy(const Matrix<T>& logits, const Labels& labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size())
    throw ShapeError("softmax_cross_entropy: " + std::to_string(logits.rows()) + " rows but " +
                     std::to_string(labels.size()) + " labels");
  const auto b = logits.rows();
  const auto c = logits.cols();
  LossGrad<T> r;
  r.grad.resize(b, c);
  if (b == 0) return r;
  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto y = labels[static_cast<std::size_t>(i)];
    if (y >= c)
      throw Error("softmax_cross_entropy: label " + std::to_string(y) + " out of range [0, " +
                  std::to_string(c) + ")");
    const double m = static_cast<double>(logits.row(i).maxCoeff());
    double z = 0.0;
    for (Eigen::Index j = 0; j < c; ++j) z += std::exp(static_cast<double>(logits(i, j)) - m);
    const double log_z = std::log(z);
    total += log_z - (static_cast<double>(logits(i, y)) - m);
    for (Eigen::Index j = 0; j < c; ++j) {
      const double p = std::exp(static_cast<double>(logits(i, j)) - m - log_z);
      r.grad(i, j) = static_cast<T>((p - (j == static_cast<Eigen::Index>(y) ? 1.0 : 0.0)) /
                                    static_cast<double>(b));
    }
  }
  r.loss = total / static_cast<double>(b);
  return r;
}

/// Mean over all entries of (pred - target)^2; gradient 2(pred - target)/count.
template <typename T>
LossGrad<T> mse(const Matrix<T>& pred, const Matrix<T>& target) {
  require_same_shape(pred, target, "mse");
  LossGrad<T> r;
  r.grad.resize(pred.rows(), pred.cols());
  const auto n = pred.size();
  if (n == 0) return r;
  double total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double diff = static_cast<double>(pred.data()[k]) - static_cast<double>(target.data()[k]);
    total += diff * diff;
    r.grad.data()[k] = static_cast<T>(2.0 * diff / static_cast<double>(n));
  }
  r.loss = total / static_cast<double>(n);
  return r;
}

/// KL(N(mu, exp(logvar)) || N(0, I)), summed over latent dims, averaged over the batch.
template <typename T>
KlResult<T> gaussian_kl(const Matrix<T>& mu, const Matrix<T>& logvar) {
  require_same_shape(mu, logvar, "gaussian_kl");
  KlResult<T> r;
  r.d_mu.resize(mu.rows(), mu.cols());
  r.d_logvar.resize(mu.rows(), mu.cols());
  const auto b = mu.rows();
  if (b == 0) return r;
  const double inv_b = 1.0 / static_cast<double>(b);
  double total = 0.0;
  for (Eigen::Index k = 0; k < mu.size(); ++k) {
    const double m = static_cast<double>(mu.data()[k]);
    const double lv = static_cast<double>(logvar.data()[k]);
    const double e = std::exp(lv);
    total += -0.5 * (1.0 + lv - m * m - e);
    r.d_mu.data()[k] = static_cast<T>(m * inv_b);
    r.d_logvar.data()[k] = static_cast<T>(0.5 * (e - 1.0) * inv_b);
  }
  r.loss = total * inv_b;
  return r;
}

/// mu + exp(logvar / 2) * noise. Noise is always supplied by the caller.
template <typename T>
Matrix<T> reparameterize(const Matrix<T>& mu, const Matrix<T>& logvar, const Matrix<T>& noise) {
  require_same_shape(mu, logvar, "reparameterize");
  require_same_shape(mu, noise, "reparameterize");
  return (mu.array() + (logvar.array() * T(0.5)).exp() * noise.array()).matrix();
}

// Loss tags accepted by the single-network backward() below.
struct CrossEntropyLoss {
  Labels labels;
};

template <typename T>
struct MseLoss {
  Matrix<T> target;
};

template <typename T>
using LossSpec = std::variant<CrossEntropyLoss, MseLoss<T>>;

template <typename T>
struct LossAndGradients {
  double loss = 0.0;
  Gradients<T> grads;
};

/// Loss of `scale * loss(mlp_forward(p, x))` and its exact parameter gradients.
template <typename T>
LossAndGradients<T> backward(const MlpParams<T>& p, const LossSpec<T>& loss, const Matrix<T>& x,
                             double scale = 1.0) {
  auto cache = mlp_forward_cached(p, x);
  LossGrad<T> lg = std::visit(
      [&](const auto& spec) -> LossGrad<T> {
        using S = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<S, CrossEntropyLoss>)
          return softmax_cross_entropy(cache.output(), spec.labels);
        else
          return mse(cache.output(), spec.target);
      },
      loss);
  if (scale != 1.0) lg.grad *= static_cast<T>(scale);
  return {scale * lg.loss, mlp_backward(p, cache, lg.grad)};
}

}  // namespace czsl::nn
