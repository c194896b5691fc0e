#pragma once

#include <cmath>
#include <cstdint>

#include "czsl/nn/mlp.hpp"

namespace czsl::nn {

template <typename T>
struct AdamState {
  Gradients<T> m;
  Gradients<T> v;
  std::uint64_t step = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const MlpParams<T>& p, double lr) {
    AdamState s;
    s.m = Gradients<T>::zeros_like(p);
    s.v = Gradients<T>::zeros_like(p);
    s.lr = lr;
    return s;
  }
};

namespace detail {

template <typename T, typename Param, typename Grad, typename Moment>
void adam_update(Param& param, const Grad& grad, Moment& m, Moment& v, const AdamState<T>& s,
                 double c1, double c2) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols() || m.rows() != grad.rows() ||
      m.cols() != grad.cols())
    throw ShapeError("adam_step: parameter/gradient/state shape mismatch");
  const T b1 = static_cast<T>(s.beta1), b2 = static_cast<T>(s.beta2);
  const T lr = static_cast<T>(s.lr), eps = static_cast<T>(s.eps);
  const T bc1 = static_cast<T>(c1), bc2 = static_cast<T>(c2);
  for (Eigen::Index k = 0; k < param.size(); ++k) {
    const T g = grad.data()[k];
    T& mk = m.data()[k];
    T& vk = v.data()[k];
    mk = b1 * mk + (T(1) - b1) * g;
    vk = b2 * vk + (T(1) - b2) * g * g;
    const T m_hat = mk / bc1;
    const T v_hat = vk / bc2;
    param.data()[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace detail

/// One bias-corrected Adam update applied in place; increments `s.step`.
template <typename T>
void adam_step(MlpParams<T>& p, const Gradients<T>& g, AdamState<T>& s) {
  if (g.weight.size() != p.layers.size() || s.m.weight.size() != p.layers.size())
    throw ShapeError("adam_step: layer count mismatch");
  ++s.step;
  const double t = static_cast<double>(s.step);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    detail::adam_update(p.layers[k].weight, g.weight[k], s.m.weight[k], s.v.weight[k], s, c1, c2);
    detail::adam_update(p.layers[k].bias, g.bias[k], s.m.bias[k], s.v.bias[k], s, c1, c2);
  }
}

}  // namespace czsl::nn
