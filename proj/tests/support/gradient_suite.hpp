#pragma once

// Randomized gradient checks: a small MLP, one loss primitive on its output,
// analytic gradients from the library against central differences of the
// scalar-loop oracle.

#include <cstdint>
#include <string>
#include <vector>

#include "czsl/core/random.hpp"
#include "czsl/nn/losses.hpp"
#include "czsl/nn/mlp.hpp"
#include "oracles.hpp"

namespace czsl::testing {

enum class LossKind { cross_entropy, mse, gaussian_kl, softmax_mse };

inline const char* loss_name(LossKind k) {
  switch (k) {
    case LossKind::cross_entropy: return "cross_entropy";
    case LossKind::mse: return "mse";
    case LossKind::gaussian_kl: return "gaussian_kl";
    case LossKind::softmax_mse: return "softmax_mse";
  }
  return "?";
}

struct GradCase {
  std::vector<std::size_t> dims;
  std::vector<nn::Activation> acts;
  LossKind loss = LossKind::mse;
  std::size_t batch = 4;
  std::uint64_t seed = 0;
};

// Case k of the suite: 1-3 layers, widths 2-12, loss cycling over all kinds,
// total parameters kept <= 1000.
inline GradCase make_grad_case(std::uint64_t k) {
  Rng rng(Rng::derive(0xC0FFEE, k));
  GradCase c;
  c.seed = Rng::derive(0xBEEF, k);
  c.loss = static_cast<LossKind>(k % 4);
  const std::size_t layers = 1 + rng.below(3);
  for (;;) {
    c.dims = {2 + rng.below(11)};
    c.acts.clear();
    for (std::size_t l = 0; l < layers; ++l) {
      c.dims.push_back(2 + rng.below(11));
      c.acts.push_back(l + 1 == layers ? nn::Activation::identity
                                       : (rng.below(4) ? nn::Activation::relu : nn::Activation::identity));
    }
    if (c.loss == LossKind::gaussian_kl && c.dims.back() % 2) ++c.dims.back();
    std::size_t params = 0;
    for (std::size_t l = 0; l + 1 < c.dims.size(); ++l) params += c.dims[l] * c.dims[l + 1] + c.dims[l + 1];
    if (params <= 1000) break;
  }
  c.batch = 2 + rng.below(5);
  return c;
}

struct GradCaseResult {
  oracle::GradCheck check;
  std::size_t parameters = 0;
};

inline GradCaseResult run_grad_case(const GradCase& c) {
  auto p = nn::mlp_init<double>(c.dims, c.acts, c.seed);
  Rng rng(Rng::derive(c.seed, 1));
  for (auto& l : p.layers) l.bias = rng.normal_matrix<double>(1, l.out_dim(), 0.5);
  const auto b = static_cast<Eigen::Index>(c.batch);
  const auto out = static_cast<Eigen::Index>(c.dims.back());
  const Matrix<double> x = rng.normal_matrix<double>(b, static_cast<Eigen::Index>(c.dims.front()));
  Labels labels(c.batch);
  for (auto& y : labels) y = static_cast<std::uint32_t>(rng.below(static_cast<std::uint64_t>(out)));
  const Matrix<double> target = rng.normal_matrix<double>(b, out);
  const auto xo = oracle::to_mat(x);

  // analytic
  std::vector<double> analytic;
  if (c.loss == LossKind::cross_entropy) {
    analytic = oracle::flatten(nn::backward<double>(p, nn::CrossEntropyLoss{labels}, x).grads);
  } else if (c.loss == LossKind::mse) {
    analytic = oracle::flatten(nn::backward<double>(p, nn::MseLoss<double>{target}, x).grads);
  } else {
    const auto cache = nn::mlp_forward_cached(p, x);
    Matrix<double> d_out;
    if (c.loss == LossKind::gaussian_kl) {
      const auto z = out / 2;
      const auto kl = nn::gaussian_kl<double>(cache.output().leftCols(z), cache.output().rightCols(z));
      d_out.resize(b, out);
      d_out.leftCols(z) = kl.d_mu;
      d_out.rightCols(z) = kl.d_logvar;
    } else {
      const Matrix<double> probs = nn::softmax(cache.output());
      d_out = nn::softmax_backward(probs, nn::mse(probs, nn::one_hot<double>(labels, out)).grad);
    }
    analytic = oracle::flatten(nn::mlp_backward(p, cache, d_out));
  }

  // oracle loss
  auto loss = [&]() {
    const auto y = oracle::mlp_forward(p, xo);
    switch (c.loss) {
      case LossKind::cross_entropy: return oracle::cross_entropy(y, labels);
      case LossKind::mse: return oracle::mse(y, oracle::to_mat(target));
      case LossKind::gaussian_kl: {
        oracle::Mat mu, lv;
        for (const auto& row : y) {
          mu.emplace_back(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(row.size() / 2));
          lv.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(row.size() / 2), row.end());
        }
        return oracle::gaussian_kl(mu, lv);
      }
      case LossKind::softmax_mse: {
        oracle::Mat probs, onehot;
        for (std::size_t i = 0; i < y.size(); ++i) {
          probs.push_back(oracle::softmax_row(y[i]));
          onehot.emplace_back(y[i].size(), 0.0);
          onehot.back()[labels[i]] = 1.0;
        }
        return oracle::mse(probs, onehot);
      }
    }
    return 0.0;
  };
  const auto numeric = oracle::finite_differences(p, loss, 1e-4);
  return {oracle::compare(analytic, numeric), p.num_parameters()};
}

}  // namespace czsl::testing
