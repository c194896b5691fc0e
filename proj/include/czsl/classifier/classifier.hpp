#pragma once

// Single-head softmax classifier trained only on synthesized features.
// Prediction never takes task identity; the label space is every class.

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "czsl/core/batching.hpp"
#include "czsl/core/matrix.hpp"
#include "czsl/core/random.hpp"
#include "czsl/learner/config.hpp"
#include "czsl/nn/adam.hpp"
#include "czsl/nn/losses.hpp"
#include "czsl/nn/mlp.hpp"

namespace czsl {

template <typename T>
struct LabeledSet {
  Matrix<T> features;
  Labels labels;

  std::size_t size() const { return labels.size(); }
};

template <typename T>
struct ClassifierParams {
  nn::MlpParams<T> net;  // d -> hidden -> C_total logits
  std::size_t trained_for_task = 0;

  std::size_t num_classes() const { return static_cast<std::size_t>(net.out_dim()); }
};

/// Trains a fresh classifier for `config.classifier_epochs` epochs of
/// mini-batch Adam on softmax cross-entropy.
template <typename T>
ClassifierParams<T> train_classifier(const LabeledSet<T>& synth, std::size_t num_classes,
                                     const TrainConfig& config, std::uint64_t seed,
                                     std::size_t task = 0) {
  if (synth.size() == 0) throw Error("train_classifier: empty training set");
  if (static_cast<std::size_t>(synth.features.rows()) != synth.size())
    throw ShapeError("train_classifier: feature rows != label count");
  for (auto y : synth.labels)
    if (y >= num_classes)
      throw Error("train_classifier: label " + std::to_string(y) + " out of range [0, " +
                  std::to_string(num_classes) + ")");

  ClassifierParams<T> c;
  c.trained_for_task = task;
  c.net = nn::mlp_init<T>({static_cast<std::size_t>(synth.features.cols()), config.classifier_hidden, num_classes},
                          {config.classifier_activation, nn::Activation::identity}, Rng::derive(seed, 20));
  auto adam = nn::AdamState<T>::for_params(c.net, config.classifier_lr);
  Rng rng(Rng::derive(seed, 21));
  for (std::size_t epoch = 0; epoch < config.classifier_epochs; ++epoch) {
    for (const auto& batch : shuffled_batches(synth.size(), config.batch_size, rng)) {
      const Matrix<T> x = gather_rows<T, std::size_t>(synth.features, batch);
      const auto step = nn::backward<T>(c.net, nn::CrossEntropyLoss{gather(synth.labels, batch)}, x);
      nn::adam_step(c.net, step.grads, adam);
    }
  }
  return c;
}

// Row-wise argmax; ties go to the smaller class index.
template <typename T>
Labels argmax_rows(const Matrix<T>& logits) {
  Labels out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j)
      if (logits(i, j) > logits(i, best)) best = j;
    out[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(best);
  }
  return out;
}

template <typename T>
Labels predict(const ClassifierParams<T>& c, const Matrix<T>& x) {
  return argmax_rows<T>(nn::mlp_forward(c.net, x));
}

/// Accuracy over the samples whose label is in `class_subset`. Per-class
/// averaging takes the mean of each class's hit rate; per-sample averaging
/// pools all samples.
inline double accuracy_from_predictions(const Labels& predicted, const Labels& truth,
                                        const std::set<std::uint32_t>& class_subset,
                                        AccuracyAveraging averaging = AccuracyAveraging::per_class) {
  if (class_subset.empty()) throw Error("per_class_accuracy: empty class subset");
  if (predicted.size() != truth.size()) throw ShapeError("per_class_accuracy: prediction count mismatch");
  std::map<std::uint32_t, std::pair<std::size_t, std::size_t>> tally;  // class -> (correct, total)
  for (auto c : class_subset) tally[c] = {0, 0};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto it = tally.find(truth[i]);
    if (it == tally.end()) continue;
    ++it->second.second;
    if (predicted[i] == truth[i]) ++it->second.first;
  }
  std::size_t correct = 0, total = 0;
  double sum = 0.0;
  for (const auto& [cls, ct] : tally) {
    if (ct.second == 0)
      throw Error("per_class_accuracy: class " + std::to_string(cls) + " has no samples");
    sum += static_cast<double>(ct.first) / static_cast<double>(ct.second);
    correct += ct.first;
    total += ct.second;
  }
  if (averaging == AccuracyAveraging::per_sample)
    return static_cast<double>(correct) / static_cast<double>(total);
  return sum / static_cast<double>(tally.size());
}

template <typename T>
double per_class_accuracy(const ClassifierParams<T>& c, const Matrix<T>& features, const Labels& labels,
                          const std::set<std::uint32_t>& class_subset,
                          AccuracyAveraging averaging = AccuracyAveraging::per_class) {
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw ShapeError("per_class_accuracy: feature rows != label count");
  return accuracy_from_predictions(predict(c, features), labels, class_subset, averaging);
}

}  // namespace czsl
