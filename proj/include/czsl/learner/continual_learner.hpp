#pragma once

// Task-by-task training with architecture growth and generative replay.
//
// Each task gets a fresh CvaeModule trained on the task's real samples plus
// samples replayed from the frozen modules of earlier tasks (every past class
// is replayed by the module of its own task). After training the module is
// frozen and appended; it never changes again.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "czsl/classifier/classifier.hpp"
#include "czsl/core/batching.hpp"
#include "czsl/core/binary_io.hpp"
#include "czsl/core/random.hpp"
#include "czsl/data/dataset.hpp"
#include "czsl/data/tasks.hpp"
#include "czsl/learner/config.hpp"
#include "czsl/model/cvae.hpp"
#include "czsl/nn/adam.hpp"

namespace czsl {

template <typename T>
struct ReplayBuffer {
  Matrix<T> features;
  Labels labels;
  Matrix<T> embeddings;  // attribute row of each sample's label

  std::size_t size() const { return labels.size(); }
};

// Per-task training trace.
struct TaskTrainLog {
  std::size_t task = 0;
  std::size_t real_rows = 0;
  std::size_t replay_rows = 0;
  std::vector<LossBreakdown> epoch_means;
};

template <typename T>
struct LearnerState {
  std::shared_ptr<const FeatureDataset> dataset;
  TaskSpec spec;
  TrainConfig config;
  std::vector<CvaeModule<T>> modules;
  std::vector<TaskTrainLog> logs;

  std::size_t tasks_trained() const { return modules.size(); }

  static LearnerState start(std::shared_ptr<const FeatureDataset> ds, TaskSpec spec, TrainConfig config) {
    if (!ds) throw Error("learner: null dataset");
    spec.validate(ds->num_classes());
    config.validate();
    LearnerState s;
    s.dataset = std::move(ds);
    s.spec = std::move(spec);
    s.config = std::move(config);
    return s;
  }
};

namespace detail {

template <typename T>
void append_rows(Matrix<T>& dst, const Matrix<T>& src) {
  if (src.rows() == 0) return;
  if (dst.rows() == 0) {
    dst = src;
    return;
  }
  Matrix<T> out(dst.rows() + src.rows(), dst.cols());
  out.topRows(dst.rows()) = dst;
  out.bottomRows(src.rows()) = src;
  dst = std::move(out);
}

template <typename T>
LabeledSet<T> allocate_set(std::size_t rows, std::size_t cols) {
  LabeledSet<T> s;
  s.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  s.labels.reserve(rows);
  return s;
}

}  // namespace detail

/// Replayed samples for every class of tasks 1..tasks_trained, n_per_class
/// each, drawn from the module that owns the class. Empty before task 1.
template <typename T>
ReplayBuffer<T> build_replay(const LearnerState<T>& state, std::size_t n_per_class, std::uint64_t seed) {
  const auto& ds = *state.dataset;
  ReplayBuffer<T> buf;
  std::size_t total = 0;
  for (std::size_t k = 0; k < state.tasks_trained(); ++k) total += state.spec.tasks[k].size() * n_per_class;
  buf.features.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(ds.feature_dim()));
  buf.embeddings.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(ds.attr_dim()));
  buf.labels.reserve(total);
  if (n_per_class == 0) return buf;
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < state.tasks_trained(); ++k) {
    const auto& owner = state.modules[k];
    for (auto c : state.spec.tasks[k]) {
      const RowVector<T> e = ds.attributes.row(c).template cast<T>();
      const auto n = static_cast<Eigen::Index>(n_per_class);
      buf.features.middleRows(row, n) = generate(owner, e, n_per_class, Rng::derive(seed, c));
      buf.embeddings.middleRows(row, n) = e.replicate(n, 1);
      buf.labels.insert(buf.labels.end(), n_per_class, c);
      row += n;
    }
  }
  return buf;
}

template <typename T>
struct TrainingSet {
  Matrix<T> features;
  Labels labels;
  Matrix<T> embeddings;
  std::size_t real_rows = 0;
  std::size_t replay_rows = 0;

  std::size_t size() const { return labels.size(); }
};

// Real samples of `task` followed by the replay buffer built from the state.
template <typename T>
TrainingSet<T> build_training_set(const LearnerState<T>& state, const TaskView& task) {
  const auto& ds = *state.dataset;
  TrainingSet<T> set;
  set.features = gather_rows<float, std::size_t>(ds.features_train, task.train_indices).template cast<T>();
  set.labels = gather(ds.labels_train, task.train_indices);
  set.embeddings = ds.attributes_for(set.labels).template cast<T>();
  set.real_rows = set.labels.size();

  const auto replay = build_replay(state, state.config.n_replay_per_class,
                                   Rng::derive(state.config.seed, 100 + task.task_index));
  detail::append_rows(set.features, replay.features);
  detail::append_rows(set.embeddings, replay.embeddings);
  set.labels.insert(set.labels.end(), replay.labels.begin(), replay.labels.end());
  set.replay_rows = replay.size();
  return set;
}

/// Trains the module for `task` (which must be the next one), freezes it,
/// and appends it to the state.
template <typename T>
const TaskTrainLog& train_task(LearnerState<T>& state, const TaskView& task) {
  if (task.task_index != state.tasks_trained() + 1)
    throw Error("train_task: expected task " + std::to_string(state.tasks_trained() + 1) + ", got " +
                std::to_string(task.task_index));
  if (task.train_indices.empty() || task.classes.empty())
    throw Error("train_task: task " + std::to_string(task.task_index) + " has no training samples");

  const auto& ds = *state.dataset;
  const auto& cfg = state.config;
  const std::uint64_t t = task.task_index;
  const auto data = build_training_set(state, task);

  auto module = cvae_init<T>(t, task.classes, ds.feature_dim(), ds.attr_dim(), ds.num_classes(), cfg.z_dim,
                             cfg.hidden, Rng::derive(cfg.seed, 200 + t));
  auto adam_enc = nn::AdamState<T>::for_params(module.encoder, cfg.lr);
  auto adam_dec = nn::AdamState<T>::for_params(module.decoder, cfg.lr);
  auto adam_aux = nn::AdamState<T>::for_params(module.aux, cfg.lr);
  const LossWeights weights = cfg.effective_weights();

  TaskTrainLog log;
  log.task = t;
  log.real_rows = data.real_rows;
  log.replay_rows = data.replay_rows;
  Rng order_rng(Rng::derive(cfg.seed, 300 + t));
  Rng noise_rng(Rng::derive(cfg.seed, 400 + t));
  const auto z = static_cast<Eigen::Index>(cfg.z_dim);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    LossBreakdown sum;
    for (const auto& batch : shuffled_batches(data.size(), cfg.batch_size, order_rng)) {
      const Matrix<T> x = gather_rows<T, std::size_t>(data.features, batch);
      const Matrix<T> e = gather_rows<T, std::size_t>(data.embeddings, batch);
      const Labels y = gather(data.labels, batch);
      const Matrix<T> noise = noise_rng.normal_matrix<T>(x.rows(), z);
      const auto r = cvae_loss_and_gradients(module, x, y, e, noise, weights);
      nn::adam_step(module.encoder, r.grads.encoder, adam_enc);
      nn::adam_step(module.decoder, r.grads.decoder, adam_dec);
      nn::adam_step(module.aux, r.grads.aux, adam_aux);
      ++module.train_steps;
      const double bw = static_cast<double>(batch.size());
      sum.l_task += bw * r.losses.l_task;
      sum.l_recon += bw * r.losses.l_recon;
      sum.l_kl += bw * r.losses.l_kl;
      sum.l_vae += bw * r.losses.l_vae;
      sum.l_y += bw * r.losses.l_y;
      sum.l_e += bw * r.losses.l_e;
      sum.total += bw * r.losses.total;
    }
    const double n = static_cast<double>(data.size());
    log.epoch_means.push_back({sum.l_task / n, sum.l_recon / n, sum.l_kl / n, sum.l_vae / n, sum.l_y / n,
                               sum.l_e / n, sum.total / n});
  }
  module.frozen = true;
  state.modules.push_back(std::move(module));
  state.logs.push_back(std::move(log));
  return state.logs.back();
}

/// Synthetic classifier training set after task t: n_per_class samples for
/// every class. Unseen classes (tasks > t) always come from module t; seen
/// classes come from module t or from their owning module per config.
template <typename T>
LabeledSet<T> synthesize_classifier_set(const LearnerState<T>& state, std::size_t t, std::size_t n_per_class,
                                        std::uint64_t seed) {
  if (t < 1 || t > state.tasks_trained())
    throw Error("synthesize_classifier_set: t=" + std::to_string(t) + " out of range [1, " +
                std::to_string(state.tasks_trained()) + "]");
  if (n_per_class == 0) throw Error("synthesize_classifier_set: n_per_class must be >= 1");
  const auto& ds = *state.dataset;
  const auto& newest = state.modules[t - 1];
  auto set = detail::allocate_set<T>(ds.num_classes() * n_per_class, ds.feature_dim());
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < state.spec.num_tasks(); ++k) {
    const bool seen = k < t;
    const auto& source =
        (seen && state.config.seen_source == SeenSource::owner) ? state.modules[k] : newest;
    for (auto c : state.spec.tasks[k]) {
      const RowVector<T> e = ds.attributes.row(c).template cast<T>();
      const auto n = static_cast<Eigen::Index>(n_per_class);
      set.features.middleRows(row, n) = generate(source, e, n_per_class, Rng::derive(seed, c));
      set.labels.insert(set.labels.end(), n_per_class, c);
      row += n;
    }
  }
  return set;
}

// --- learner checkpoints ----------------------------------------------------
//
// manifest.json: {"task_order": [[classes]...], "tasks_trained": t, "seed": s,
//                 "config": {...}, "modules": ["module_001", ...]}
// plus one module checkpoint directory per trained task.

inline std::string module_dir_name(std::size_t task) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "module_%03zu", task);
  return buf;
}

template <typename T>
void save_learner(const LearnerState<T>& state, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir, "cannot create directory: " + ec.message());
  nlohmann::ordered_json manifest;
  manifest["task_order"] = state.spec.tasks;
  manifest["tasks_trained"] = state.tasks_trained();
  manifest["seed"] = state.config.seed;
  manifest["config"] = to_json(state.config);
  manifest["modules"] = nlohmann::ordered_json::array();
  for (const auto& m : state.modules) {
    const auto name = module_dir_name(m.task_id);
    save_module(m, dir / name);
    manifest["modules"].push_back(name);
  }
  write_file_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

template <typename T>
LearnerState<T> load_learner(const fs::path& dir, std::shared_ptr<const FeatureDataset> ds) {
  const auto manifest = nlohmann::json::parse(read_file_text(dir / "manifest.json"));
  TaskSpec spec;
  spec.tasks = manifest.at("task_order").get<std::vector<ClassList>>();
  auto state = LearnerState<T>::start(std::move(ds), std::move(spec), train_config_from_json(manifest.at("config")));
  for (const auto& name : manifest.at("modules")) {
    auto m = load_module<T>(dir / name.get<std::string>());
    if (m.task_id != state.tasks_trained() + 1) throw IoError(dir, "modules out of task order");
    if (m.feature_dim != state.dataset->feature_dim() || m.attr_dim != state.dataset->attr_dim() ||
        m.num_classes != state.dataset->num_classes())
      throw IoError(dir / name.get<std::string>(), "module dims do not match dataset");
    state.modules.push_back(std::move(m));
  }
  return state;
}

}  // namespace czsl
