#pragma once

// Reference implementations used only by tests. Plain scalar loops over
// std::vector; they share no code with the library's Eigen-based paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "czsl/nn/mlp.hpp"

namespace czsl::oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat to_mat(const Matrix<double>& m) {
  Mat out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline Mat mlp_forward(const nn::MlpParams<double>& p, Mat x) {
  for (const auto& l : p.layers) {
    Mat y(x.size(), std::vector<double>(static_cast<std::size_t>(l.out_dim())));
    for (std::size_t b = 0; b < x.size(); ++b)
      for (Eigen::Index o = 0; o < l.out_dim(); ++o) {
        double acc = l.bias(o);
        for (Eigen::Index i = 0; i < l.in_dim(); ++i) acc += l.weight(o, i) * x[b][i];
        y[b][o] = l.activation == nn::Activation::relu ? std::max(acc, 0.0) : acc;
      }
    x = std::move(y);
  }
  return x;
}

inline double cross_entropy(const Mat& logits, const std::vector<std::uint32_t>& labels) {
  double total = 0;
  for (std::size_t b = 0; b < logits.size(); ++b) {
    double z = 0;
    for (double v : logits[b]) z += std::exp(v);
    total += -std::log(std::exp(logits[b][labels[b]]) / z);
  }
  return total / static_cast<double>(logits.size());
}

inline std::vector<double> softmax_row(const std::vector<double>& row) {
  double z = 0;
  for (double v : row) z += std::exp(v);
  std::vector<double> out;
  for (double v : row) out.push_back(std::exp(v) / z);
  return out;
}

inline double mse(const Mat& a, const Mat& b) {
  double total = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      total += (a[i][j] - b[i][j]) * (a[i][j] - b[i][j]);
      ++n;
    }
  return total / static_cast<double>(n);
}

inline double gaussian_kl(const Mat& mu, const Mat& logvar) {
  double total = 0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < mu[i].size(); ++j)
      total += 0.5 * (mu[i][j] * mu[i][j] + std::exp(logvar[i][j]) - 1.0 - logvar[i][j]);
  return total / static_cast<double>(mu.size());
}

// Visits every parameter of an MLP as a mutable scalar reference.
inline void for_each_param(nn::MlpParams<double>& p, const std::function<void(double&)>& f) {
  for (auto& l : p.layers) {
    for (Eigen::Index k = 0; k < l.weight.size(); ++k) f(l.weight.data()[k]);
    for (Eigen::Index k = 0; k < l.bias.size(); ++k) f(l.bias.data()[k]);
  }
}

inline std::vector<double> flatten(const nn::Gradients<double>& g) {
  std::vector<double> out;
  for (std::size_t k = 0; k < g.weight.size(); ++k) {
    out.insert(out.end(), g.weight[k].data(), g.weight[k].data() + g.weight[k].size());
    out.insert(out.end(), g.bias[k].data(), g.bias[k].data() + g.bias[k].size());
  }
  return out;
}

// Central differences of `loss` with respect to every parameter of `p`.
inline std::vector<double> finite_differences(nn::MlpParams<double>& p, const std::function<double()>& loss,
                                              double h = 1e-4) {
  std::vector<double> out;
  for_each_param(p, [&](double& w) {
    const double saved = w;
    w = saved + h;
    const double up = loss();
    w = saved - h;
    const double down = loss();
    w = saved;
    out.push_back((up - down) / (2 * h));
  });
  return out;
}

struct GradCheck {
  double p99 = 0;
  double max = 0;
  std::size_t count = 0;
};

// Relative error |a - n| / max(|a|, |n|, floor) per coordinate. The floor keeps
// coordinates whose true gradient is ~0 from dominating through FD roundoff.
inline GradCheck compare(const std::vector<double>& analytic, const std::vector<double>& numeric,
                         double floor = 1e-6) {
  std::vector<double> errs;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    errs.push_back(std::abs(analytic[i] - numeric[i]) / denom);
  }
  GradCheck r;
  r.count = errs.size();
  if (errs.empty()) return r;
  std::sort(errs.begin(), errs.end());
  r.max = errs.back();
  r.p99 = errs[static_cast<std::size_t>(std::floor(0.99 * static_cast<double>(errs.size() - 1)))];
  return r;
}

}  // namespace czsl::oracle
