#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "czsl/core/matrix.hpp"
#include "czsl/core/random.hpp"

namespace czsl::nn {

enum class Activation { relu, identity };

inline std::string_view to_string(Activation a) {
  return a == Activation::relu ? "relu" : "identity";
}

inline Activation activation_from_string(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  throw Error("unknown activation '" + std::string(s) + "'");
}

template <typename T>
struct Layer {
  Matrix<T> weight;  // out x in
  RowVector<T> bias;  // out
  Activation activation = Activation::identity;

  Eigen::Index in_dim() const { return weight.cols(); }
  Eigen::Index out_dim() const { return weight.rows(); }

  // Exact equality; shapes are compared first.
  bool operator==(const Layer& o) const {
    return activation == o.activation && weight.rows() == o.weight.rows() && weight.cols() == o.weight.cols() &&
           bias.size() == o.bias.size() && weight == o.weight && bias == o.bias;
  }
};

template <typename T>
struct MlpParams {
  std::vector<Layer<T>> layers;
  std::uint64_t seed = 0;

  Eigen::Index in_dim() const { return layers.front().in_dim(); }
  Eigen::Index out_dim() const { return layers.back().out_dim(); }

  std::size_t num_parameters() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  void validate() const {
    if (layers.empty()) throw Error("mlp: no layers");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const auto& l = layers[k];
      if (l.bias.size() != l.out_dim()) throw ShapeError("mlp: bias width mismatch at layer " + std::to_string(k));
      if (k > 0 && l.in_dim() != layers[k - 1].out_dim())
        throw ShapeError("mlp: layer " + std::to_string(k) + " input " + std::to_string(l.in_dim()) +
                         " does not chain with previous output " +
                         std::to_string(layers[k - 1].out_dim()));
      if (!all_finite(l.weight) || !all_finite(l.bias))
        throw Error("mlp: non-finite parameter at layer " + std::to_string(k));
    }
  }

  template <typename U>
  MlpParams<U> cast() const {
    MlpParams<U> out;
    out.seed = seed;
    for (const auto& l : layers)
      out.layers.push_back({l.weight.template cast<U>(), l.bias.template cast<U>(), l.activation});
    return out;
  }

  bool operator==(const MlpParams&) const = default;
};

// Per-parameter partial derivatives, shaped like the owning MlpParams.
template <typename T>
struct Gradients {
  std::vector<Matrix<T>> weight;
  std::vector<RowVector<T>> bias;

  static Gradients zeros_like(const MlpParams<T>& p) {
    Gradients g;
    for (const auto& l : p.layers) {
      g.weight.push_back(Matrix<T>::Zero(l.weight.rows(), l.weight.cols()));
      g.bias.push_back(RowVector<T>::Zero(l.bias.size()));
    }
    return g;
  }

  Gradients& operator+=(const Gradients& o) {
    for (std::size_t k = 0; k < weight.size(); ++k) {
      weight[k] += o.weight[k];
      bias[k] += o.bias[k];
    }
    return *this;
  }

  Gradients& operator*=(T s) {
    for (std::size_t k = 0; k < weight.size(); ++k) {
      weight[k] *= s;
      bias[k] *= s;
    }
    return *this;
  }
};

/// Fresh parameters: weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero bias.
/// `layer_dims` lists input width then each layer's output width.
template <typename T>
MlpParams<T> mlp_init(const std::vector<std::size_t>& layer_dims,
                      const std::vector<Activation>& activations, std::uint64_t seed) {
  if (layer_dims.size() < 2) throw Error("mlp_init: need at least input and output widths");
  if (activations.size() != layer_dims.size() - 1)
    throw Error("mlp_init: " + std::to_string(layer_dims.size() - 1) + " layers but " +
                std::to_string(activations.size()) + " activations");
  for (auto d : layer_dims)
    if (d == 0) throw Error("mlp_init: layer widths must be positive");

  MlpParams<T> p;
  p.seed = seed;
  Rng rng(seed);
  for (std::size_t k = 0; k + 1 < layer_dims.size(); ++k) {
    const auto in = static_cast<Eigen::Index>(layer_dims[k]);
    const auto out = static_cast<Eigen::Index>(layer_dims[k + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Layer<T> l;
    l.weight.resize(out, in);
    for (Eigen::Index i = 0; i < out; ++i)
      for (Eigen::Index j = 0; j < in; ++j) l.weight(i, j) = static_cast<T>(rng.uniform(-bound, bound));
    l.bias = RowVector<T>::Zero(out);
    l.activation = activations[k];
    p.layers.push_back(std::move(l));
  }
  return p;
}

// Activations retained by a forward pass for the backward pass.
// inputs[k] is the input to layer k; inputs.back() is the network output.
template <typename T>
struct ForwardCache {
  std::vector<Matrix<T>> inputs;
  const Matrix<T>& output() const { return inputs.back(); }
};

namespace detail {

template <typename T>
Matrix<T> apply_layer(const Layer<T>& l, const Matrix<T>& x) {
  Matrix<T> y = x * l.weight.transpose();
  y.rowwise() += l.bias;
  if (l.activation == Activation::relu) y = y.cwiseMax(T(0));
  return y;
}

template <typename T>
void check_input(const MlpParams<T>& p, const Matrix<T>& x) {
  if (p.layers.empty()) throw Error("mlp_forward: no layers");
  if (x.cols() != p.in_dim())
    throw ShapeError("mlp_forward: input width " + std::to_string(x.cols()) + " != " +
                     std::to_string(p.in_dim()));
}

}  // namespace detail

template <typename T>
Matrix<T> mlp_forward(const MlpParams<T>& p, const Matrix<T>& x) {
  detail::check_input(p, x);
  Matrix<T> h = x;
  for (const auto& l : p.layers) h = detail::apply_layer(l, h);
  return h;
}

template <typename T>
ForwardCache<T> mlp_forward_cached(const MlpParams<T>& p, const Matrix<T>& x) {
  detail::check_input(p, x);
  ForwardCache<T> cache;
  cache.inputs.reserve(p.layers.size() + 1);
  cache.inputs.push_back(x);
  for (const auto& l : p.layers) cache.inputs.push_back(detail::apply_layer(l, cache.inputs.back()));
  return cache;
}

/// Reverse pass given dLoss/dOutput. Writes dLoss/dInput to `d_input` when non-null.
template <typename T>
Gradients<T> mlp_backward(const MlpParams<T>& p, const ForwardCache<T>& cache,
                          const Matrix<T>& d_output, Matrix<T>* d_input = nullptr) {
  require_same_shape(d_output, cache.output(), "mlp_backward");
  Gradients<T> g;
  g.weight.resize(p.layers.size());
  g.bias.resize(p.layers.size());
  Matrix<T> delta = d_output;
  for (std::size_t k = p.layers.size(); k-- > 0;) {
    const auto& l = p.layers[k];
    if (l.activation == Activation::relu)
      delta = (cache.inputs[k + 1].array() > T(0)).select(delta, T(0));
    g.weight[k] = delta.transpose() * cache.inputs[k];
    g.bias[k] = delta.colwise().sum();
    if (k > 0 || d_input) delta = delta * l.weight;
  }
  if (d_input) *d_input = std::move(delta);
  return g;
}

}  // namespace czsl::nn
