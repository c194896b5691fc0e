#pragma once

// Feature dataset container.
//
// A dataset lives in a directory:
//
//   meta.json           {name, num_train, num_test, feature_dim, num_classes, attr_dim}
//   features_train.f32  num_train x feature_dim, row-major little-endian binary32
//   features_test.f32   num_test x feature_dim
//   attributes.f32      num_classes x attr_dim
//   labels_train.u32    num_train little-endian uint32
//   labels_test.u32     num_test
//   tasks.json          optional, {"tasks": [[class indices], ...]}
//
// Upstream ZSL feature archives must be converted to this layout externally.

#include <algorithm>
#include <array>
#include <cctype>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "czsl/core/binary_io.hpp"
#include "czsl/core/matrix.hpp"

namespace czsl {

class DataError : public Error {
 public:
  using Error::Error;
};

struct FeatureDataset {
  std::string name;
  MatrixF features_train;
  Labels labels_train;
  MatrixF features_test;
  Labels labels_test;
  MatrixF attributes;  // one row per class

  std::size_t num_classes() const { return static_cast<std::size_t>(attributes.rows()); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features_train.cols()); }
  std::size_t attr_dim() const { return static_cast<std::size_t>(attributes.cols()); }
  std::size_t num_train() const { return labels_train.size(); }
  std::size_t num_test() const { return labels_test.size(); }

  // Throws DataError describing the first violated invariant.
  void validate() const {
    if (num_classes() < 2) throw DataError("dataset '" + name + "': need at least 2 classes");
    if (attr_dim() == 0) throw DataError("dataset '" + name + "': attribute dim must be > 0");
    if (features_train.cols() == 0)
      throw DataError("dataset '" + name + "': feature dim must be > 0");
    if (features_test.cols() != features_train.cols() && features_test.rows() > 0)
      throw DataError("dataset '" + name + "': train/test feature dims differ");
    if (static_cast<std::size_t>(features_train.rows()) != labels_train.size())
      throw DataError("dataset '" + name + "': train feature rows != train label count");
    if (static_cast<std::size_t>(features_test.rows()) != labels_test.size())
      throw DataError("dataset '" + name + "': test feature rows != test label count");
    auto check_labels = [&](const Labels& labels, const char* which) {
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] >= num_classes())
          throw DataError("dataset '" + name + "': " + which + " label " +
                          std::to_string(labels[i]) + " at index " + std::to_string(i) +
                          " out of range [0, " + std::to_string(num_classes()) + ")");
    };
    check_labels(labels_train, "train");
    check_labels(labels_test, "test");
    if (!all_finite(features_train) || !all_finite(features_test) || !all_finite(attributes))
      throw DataError("dataset '" + name + "': non-finite entry");
  }

  // Attribute rows for each label, one output row per label.
  MatrixF attributes_for(const Labels& labels) const {
    MatrixF out(static_cast<Eigen::Index>(labels.size()), attributes.cols());
    for (std::size_t i = 0; i < labels.size(); ++i)
      out.row(static_cast<Eigen::Index>(i)) = attributes.row(labels[i]);
    return out;
  }
};

// Published statistics for the standard benchmarks.
struct BenchmarkContract {
  std::string_view name;
  std::size_t attr_dim;
  std::size_t num_classes;
  std::size_t num_train;
  std::size_t num_test;
};

inline constexpr std::array<BenchmarkContract, 5> kBenchmarkContracts{{
    {"SUN", 102, 708, 11328, 2832},
    {"CUB", 312, 200, 9440, 2348},
    {"AWA1", 85, 50, 24382, 6093},
    {"AWA2", 85, 50, 29860, 7462},
    {"aPY", 64, 32, 12272, 3067},
}};

inline std::optional<BenchmarkContract> find_contract(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  };
  for (const auto& c : kBenchmarkContracts)
    if (lower(c.name) == lower(name)) return c;
  return std::nullopt;
}

// Compares a dataset against its benchmark's published statistics. Class and
// attribute counts must match; SUN with 717 classes and sample-count
// differences (public splits vary) only produce warnings.
inline std::vector<std::string> check_benchmark_contract(const FeatureDataset& ds) {
  std::vector<std::string> warnings;
  const auto contract = find_contract(ds.name);
  if (!contract) return warnings;
  if (ds.attr_dim() != contract->attr_dim)
    throw DataError("dataset '" + ds.name + "': attribute dim " + std::to_string(ds.attr_dim()) +
                    " != expected " + std::to_string(contract->attr_dim));
  if (ds.num_classes() != contract->num_classes) {
    if (contract->name == "SUN" && ds.num_classes() == 717) {
      warnings.push_back("dataset 'SUN' has 717 classes; reference statistics list 708");
    } else {
      throw DataError("dataset '" + ds.name + "': class count " +
                      std::to_string(ds.num_classes()) + " != expected " +
                      std::to_string(contract->num_classes));
    }
  }
  if (ds.num_train() != contract->num_train || ds.num_test() != contract->num_test)
    warnings.push_back("dataset '" + ds.name + "': sample counts " +
                       std::to_string(ds.num_train()) + " + " + std::to_string(ds.num_test()) +
                       " differ from reference " + std::to_string(contract->num_train) + " + " +
                       std::to_string(contract->num_test));
  return warnings;
}

namespace detail {

inline std::size_t meta_count(const nlohmann::json& meta, const fs::path& file, const char* key) {
  if (!meta.contains(key) || !meta[key].is_number_unsigned())
    throw IoError(file, std::string("missing or invalid field '") + key + "'");
  return meta[key].get<std::size_t>();
}

}  // namespace detail

/// Loads and validates a dataset container directory. Warnings (benchmark
/// statistic mismatches that are tolerated) go to `warnings` when given,
/// otherwise to stderr.
inline FeatureDataset load_dataset(const fs::path& dir,
                                   std::vector<std::string>* warnings = nullptr) {
  const fs::path meta_path = dir / "meta.json";
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file_text(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(meta_path, std::string("malformed JSON: ") + e.what());
  }

  FeatureDataset ds;
  ds.name = meta.value("name", std::string{});
  const auto n_train = detail::meta_count(meta, meta_path, "num_train");
  const auto n_test = detail::meta_count(meta, meta_path, "num_test");
  const auto d = detail::meta_count(meta, meta_path, "feature_dim");
  const auto c = detail::meta_count(meta, meta_path, "num_classes");
  const auto a = detail::meta_count(meta, meta_path, "attr_dim");
  if (d == 0 || a == 0 || c < 2) throw IoError(meta_path, "dims must be positive and classes >= 2");

  auto load_f32 = [&](const char* fname, std::size_t rows, std::size_t cols) {
    const fs::path p = dir / fname;
    const auto bytes = read_file_bytes(p);
    return decode_f32(p, bytes.data(), bytes.size(), static_cast<Eigen::Index>(rows),
                      static_cast<Eigen::Index>(cols));
  };
  auto load_u32 = [&](const char* fname, std::size_t count) {
    const fs::path p = dir / fname;
    auto labels = decode_u32(p, read_file_bytes(p), count);
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] >= c)
        throw IoError(p, 4 * static_cast<std::uint64_t>(i),
                      "label out of range: " + std::to_string(labels[i]) + " >= " +
                          std::to_string(c));
    return labels;
  };

  ds.features_train = load_f32("features_train.f32", n_train, d);
  ds.features_test = load_f32("features_test.f32", n_test, d);
  ds.attributes = load_f32("attributes.f32", c, a);
  ds.labels_train = load_u32("labels_train.u32", n_train);
  ds.labels_test = load_u32("labels_test.u32", n_test);
  ds.validate();

  for (const auto& w : check_benchmark_contract(ds)) {
    if (warnings)
      warnings->push_back(w);
    else
      std::cerr << "warning: " << w << '\n';
  }
  return ds;
}

/// Writes `ds` as a container directory (created if needed).
inline void write_dataset(const FeatureDataset& ds, const fs::path& dir) {
  ds.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir, "cannot create directory: " + ec.message());
  nlohmann::ordered_json meta;
  meta["name"] = ds.name;
  meta["num_train"] = ds.num_train();
  meta["num_test"] = ds.num_test();
  meta["feature_dim"] = ds.feature_dim();
  meta["num_classes"] = ds.num_classes();
  meta["attr_dim"] = ds.attr_dim();
  write_file_text(dir / "meta.json", meta.dump(2) + "\n");
  write_file_bytes(dir / "features_train.f32", encode_f32(ds.features_train));
  write_file_bytes(dir / "features_test.f32", encode_f32(ds.features_test));
  write_file_bytes(dir / "attributes.f32", encode_f32(ds.attributes));
  write_file_bytes(dir / "labels_train.u32", encode_u32(ds.labels_train));
  write_file_bytes(dir / "labels_test.u32", encode_u32(ds.labels_test));
}

}  // namespace czsl
