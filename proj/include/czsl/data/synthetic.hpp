#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "czsl/core/random.hpp"
#include "czsl/data/dataset.hpp"

namespace czsl {

// Desk-scale dataset whose class centers are a linear function of the class
// attributes, so attribute-conditioned generation can transfer to classes it
// never saw.
struct SyntheticSpec {
  std::size_t num_classes = 8;
  std::size_t attr_dim = 4;
  std::size_t feature_dim = 16;
  std::size_t samples_per_class = 40;
  double cluster_noise = 0.3;
  MatrixF attribute_to_mean_map;  // attr_dim x feature_dim
  std::uint64_t seed = 0;

  void validate() const {
    if (num_classes < 2 || attr_dim == 0 || feature_dim == 0)
      throw DataError("synthetic spec: need C >= 2 and positive dims");
    if (samples_per_class < 2) throw DataError("synthetic spec: samples_per_class must be >= 2");
    if (!(cluster_noise >= 0.0) || !std::isfinite(cluster_noise))
      throw DataError("synthetic spec: cluster_noise must be finite and >= 0");
    if (static_cast<std::size_t>(attribute_to_mean_map.rows()) != attr_dim ||
        static_cast<std::size_t>(attribute_to_mean_map.cols()) != feature_dim)
      throw DataError("synthetic spec: attribute_to_mean_map must be " +
                      shape_str(static_cast<Eigen::Index>(attr_dim),
                                static_cast<Eigen::Index>(feature_dim)));
  }

  std::size_t test_per_class() const {
    return std::max<std::size_t>(1, samples_per_class / 5);
  }
  std::size_t train_per_class() const { return samples_per_class - test_per_class(); }

  // Spec with a map drawn from N(0, 1/attr_dim), so each center coordinate
  // has roughly unit variance.
  static SyntheticSpec with_random_map(std::size_t classes, std::size_t attr_dim,
                                       std::size_t feature_dim, std::size_t samples_per_class,
                                       double cluster_noise, std::uint64_t seed) {
    SyntheticSpec s;
    s.num_classes = classes;
    s.attr_dim = attr_dim;
    s.feature_dim = feature_dim;
    s.samples_per_class = samples_per_class;
    s.cluster_noise = cluster_noise;
    s.seed = seed;
    Rng rng(Rng::derive(seed, 1));
    s.attribute_to_mean_map = rng.normal_matrix<float>(
        static_cast<Eigen::Index>(attr_dim), static_cast<Eigen::Index>(feature_dim),
        1.0 / std::sqrt(static_cast<double>(attr_dim)));
    return s;
  }
};

/// Pure function of `spec`. Train rows come first per class in ascending
/// class order; the last max(1, n/5) samples of each class form the test split.
inline FeatureDataset make_synthetic_dataset(const SyntheticSpec& spec) {
  spec.validate();
  const auto c = static_cast<Eigen::Index>(spec.num_classes);
  const auto d = static_cast<Eigen::Index>(spec.feature_dim);
  const auto n_tr = spec.train_per_class();
  const auto n_te = spec.test_per_class();

  FeatureDataset ds;
  ds.name = "synthetic";
  Rng attr_rng(Rng::derive(spec.seed, 0));
  ds.attributes = attr_rng.normal_matrix<float>(c, static_cast<Eigen::Index>(spec.attr_dim));

  const MatrixD centers =
      ds.attributes.cast<double>() * spec.attribute_to_mean_map.cast<double>();

  ds.features_train.resize(c * static_cast<Eigen::Index>(n_tr), d);
  ds.features_test.resize(c * static_cast<Eigen::Index>(n_te), d);
  Rng noise_rng(Rng::derive(spec.seed, 2));
  Eigen::Index tr = 0, te = 0;
  for (Eigen::Index k = 0; k < c; ++k) {
    for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
      const bool is_train = s < n_tr;
      auto row = is_train ? ds.features_train.row(tr++) : ds.features_test.row(te++);
      for (Eigen::Index j = 0; j < d; ++j)
        row(j) = static_cast<float>(centers(k, j) + spec.cluster_noise * noise_rng.normal());
      (is_train ? ds.labels_train : ds.labels_test).push_back(static_cast<std::uint32_t>(k));
    }
  }
  ds.validate();
  return ds;
}

}  // namespace czsl
