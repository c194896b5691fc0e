#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "czsl/core/binary_io.hpp"
#include "czsl/data/dataset.hpp"

namespace czsl {

using ClassList = std::vector<std::uint32_t>;

// Ordered partition of the class set into tasks.
struct TaskSpec {
  std::vector<ClassList> tasks;

  std::size_t num_tasks() const { return tasks.size(); }

  std::size_t num_classes() const {
    std::size_t n = 0;
    for (const auto& t : tasks) n += t.size();
    return n;
  }

  // Throws DataError unless the lists are non-empty, disjoint, and cover [0, C).
  void validate(std::size_t num_classes) const {
    if (tasks.empty()) throw DataError("task spec: no tasks");
    std::vector<int> hits(num_classes, 0);
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      if (tasks[t].empty()) throw DataError("task spec: task " + std::to_string(t + 1) + " is empty");
      for (auto c : tasks[t]) {
        if (c >= num_classes)
          throw DataError("task spec: class " + std::to_string(c) + " out of range");
        if (hits[c]++)
          throw DataError("task spec: class " + std::to_string(c) + " assigned twice");
      }
    }
    for (std::size_t c = 0; c < num_classes; ++c)
      if (!hits[c]) throw DataError("task spec: class " + std::to_string(c) + " not assigned");
  }

  // 1-based task index owning class c; 0 if none.
  std::size_t task_of(std::uint32_t c) const {
    for (std::size_t t = 0; t < tasks.size(); ++t)
      if (std::find(tasks[t].begin(), tasks[t].end(), c) != tasks[t].end()) return t + 1;
    return 0;
  }
};

// One task's slice of a dataset. Indices refer to rows of the dataset's
// train/test matrices.
struct TaskView {
  std::size_t task_index = 0;  // 1-based
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  ClassList classes;
};

inline std::vector<TaskView> make_task_views(const FeatureDataset& ds, const TaskSpec& spec) {
  spec.validate(ds.num_classes());
  std::vector<std::size_t> owner(ds.num_classes());
  for (std::size_t t = 0; t < spec.tasks.size(); ++t)
    for (auto c : spec.tasks[t]) owner[c] = t;

  std::vector<TaskView> views(spec.tasks.size());
  for (std::size_t t = 0; t < views.size(); ++t) {
    views[t].task_index = t + 1;
    views[t].classes = spec.tasks[t];
  }
  for (std::size_t i = 0; i < ds.labels_train.size(); ++i)
    views[owner[ds.labels_train[i]]].train_indices.push_back(i);
  for (std::size_t i = 0; i < ds.labels_test.size(); ++i)
    views[owner[ds.labels_test[i]]].test_indices.push_back(i);
  return views;
}

/// Splits classes into `num_tasks` contiguous ascending blocks; the first
/// C mod num_tasks tasks get one extra class.
inline std::pair<TaskSpec, std::vector<TaskView>> split_tasks(const FeatureDataset& ds,
                                                               std::size_t num_tasks) {
  const std::size_t c = ds.num_classes();
  if (num_tasks < 1 || num_tasks > c)
    throw DataError("split_tasks: num_tasks " + std::to_string(num_tasks) + " out of range [1, " +
                    std::to_string(c) + "]");
  TaskSpec spec;
  const std::size_t base = c / num_tasks;
  const std::size_t extra = c % num_tasks;
  std::uint32_t next = 0;
  for (std::size_t t = 0; t < num_tasks; ++t) {
    const std::size_t size = base + (t < extra ? 1 : 0);
    ClassList block(size);
    for (auto& k : block) k = next++;
    spec.tasks.push_back(std::move(block));
  }
  auto views = make_task_views(ds, spec);
  return {std::move(spec), std::move(views)};
}

struct SeenUnseen {
  std::set<std::uint32_t> seen;
  std::set<std::uint32_t> unseen;
};

// Seen = classes of tasks 1..t; unseen = the rest.
inline SeenUnseen seen_unseen_partition(const TaskSpec& spec, std::size_t t) {
  if (t > spec.num_tasks())
    throw DataError("seen_unseen_partition: t=" + std::to_string(t) + " out of range [0, " +
                    std::to_string(spec.num_tasks()) + "]");
  SeenUnseen out;
  for (std::size_t k = 0; k < spec.num_tasks(); ++k)
    for (auto c : spec.tasks[k]) (k < t ? out.seen : out.unseen).insert(c);
  return out;
}

inline TaskSpec task_spec_from_json(const nlohmann::json& j) {
  if (!j.contains("tasks") || !j["tasks"].is_array()) throw DataError("tasks.json: missing 'tasks' array");
  TaskSpec spec;
  for (const auto& t : j["tasks"]) spec.tasks.push_back(t.get<ClassList>());
  return spec;
}

inline nlohmann::json task_spec_to_json(const TaskSpec& spec) {
  return nlohmann::json{{"tasks", spec.tasks}};
}

// Reads `tasks.json` from a container directory, if present.
inline std::optional<TaskSpec> load_task_override(const fs::path& dir) {
  const fs::path p = dir / "tasks.json";
  if (!fs::exists(p)) return std::nullopt;
  try {
    return task_spec_from_json(nlohmann::json::parse(read_file_text(p)));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(p, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace czsl
