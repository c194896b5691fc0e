#pragma once

// End-to-end experiment driver: per seed, train every task in order, build
// the classifier's synthetic set, train a fresh classifier, and evaluate.
//
// Config document (JSON; every key optional):
//
//   {
//     "dataset": {"path": "dir"}                       container directory, or
//                {"synthetic": {"classes": 16, "attr_dim": 8, "feature_dim": 32,
//                               "samples_per_class": 60, "noise": 0.3, "seed": 7}},
//     "num_tasks": 4,
//     "train": { TrainConfig keys },
//     "seeds": [0],
//     "out": "runs/example",
//     "save_checkpoints": false
//   }

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "czsl/classifier/classifier.hpp"
#include "czsl/core/binary_io.hpp"
#include "czsl/core/random.hpp"
#include "czsl/data/dataset.hpp"
#include "czsl/data/synthetic.hpp"
#include "czsl/data/tasks.hpp"
#include "czsl/eval/metrics.hpp"
#include "czsl/harness/log.hpp"
#include "czsl/learner/config.hpp"
#include "czsl/learner/continual_learner.hpp"

namespace czsl {

// Training scalar used by the harness.
using Real = float;

struct SyntheticSettings {
  std::size_t classes = 16;
  std::size_t attr_dim = 8;
  std::size_t feature_dim = 32;
  std::size_t samples_per_class = 60;
  double noise = 0.3;
  std::uint64_t seed = 7;

  SyntheticSpec spec() const {
    return SyntheticSpec::with_random_map(classes, attr_dim, feature_dim, samples_per_class, noise, seed);
  }
};

struct ExperimentConfig {
  std::optional<std::string> dataset_path;
  SyntheticSettings synthetic{};
  std::size_t num_tasks = 4;
  TrainConfig train{};
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir;
  bool save_checkpoints = false;

  void validate() const {
    if (seeds.empty()) throw Error("experiment config: at least one seed required");
    if (num_tasks < 2) throw Error("experiment config: num_tasks must be >= 2");
    train.validate();
  }
};

inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  if (c.dataset_path) {
    j["dataset"] = {{"path", *c.dataset_path}};
  } else {
    const auto& s = c.synthetic;
    j["dataset"]["synthetic"] = {{"classes", s.classes},         {"attr_dim", s.attr_dim},
                                 {"feature_dim", s.feature_dim}, {"samples_per_class", s.samples_per_class},
                                 {"noise", s.noise},             {"seed", s.seed}};
  }
  j["num_tasks"] = c.num_tasks;
  j["train"] = to_json(c.train);
  j["seeds"] = c.seeds;
  j["out"] = c.output_dir;
  j["save_checkpoints"] = c.save_checkpoints;
  return j;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("experiment config: expected a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "dataset") {
        if (v.contains("path")) {
          c.dataset_path = v.at("path").get<std::string>();
        } else if (v.contains("synthetic")) {
          const auto& s = v.at("synthetic");
          for (const auto& [sk, sv] : s.items()) {
            if (sk == "classes") c.synthetic.classes = sv.get<std::size_t>();
            else if (sk == "attr_dim") c.synthetic.attr_dim = sv.get<std::size_t>();
            else if (sk == "feature_dim") c.synthetic.feature_dim = sv.get<std::size_t>();
            else if (sk == "samples_per_class") c.synthetic.samples_per_class = sv.get<std::size_t>();
            else if (sk == "noise") c.synthetic.noise = sv.get<double>();
            else if (sk == "seed") c.synthetic.seed = sv.get<std::uint64_t>();
            else throw Error("experiment config: unknown synthetic key '" + sk + "'");
          }
        } else {
          throw Error("experiment config: dataset needs 'path' or 'synthetic'");
        }
      } else if (key == "num_tasks") {
        c.num_tasks = v.get<std::size_t>();
      } else if (key == "train") {
        c.train = train_config_from_json(v);
      } else if (key == "seeds") {
        c.seeds = v.get<std::vector<std::uint64_t>>();
      } else if (key == "out") {
        c.output_dir = v.get<std::string>();
      } else if (key == "save_checkpoints") {
        c.save_checkpoints = v.get<bool>();
      } else {
        throw Error("experiment config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_experiment_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path, std::string("malformed JSON: ") + e.what());
  }
  return experiment_config_from_json(j);
}

struct SeedResult {
  std::uint64_t seed = 0;
  MetricsReport report;
  double wall_seconds = 0.0;
  std::vector<std::size_t> module_parameters;
  std::size_t classifier_parameters = 0;
};

struct RunRecord {
  nlohmann::ordered_json config_echo;
  std::vector<SeedResult> seeds;
  double wall_seconds = 0.0;

  double mean_msa() const { return mean_of([](const MetricsReport& r) { return r.msa; }); }
  double mean_mua() const { return mean_of([](const MetricsReport& r) { return r.mua; }); }
  double mean_mh() const { return mean_of([](const MetricsReport& r) { return r.mh; }); }

 private:
  template <typename F>
  double mean_of(F f) const {
    double s = 0.0;
    for (const auto& r : seeds) s += f(r.report);
    return seeds.empty() ? 0.0 : s / static_cast<double>(seeds.size());
  }
};

inline FeatureDataset load_experiment_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset_path) return load_dataset(*cfg.dataset_path);
  return make_synthetic_dataset(cfg.synthetic.spec());
}

inline TaskSpec experiment_tasks(const ExperimentConfig& cfg, const FeatureDataset& ds) {
  if (cfg.dataset_path) {
    if (auto spec = load_task_override(*cfg.dataset_path)) {
      spec->validate(ds.num_classes());
      return *spec;
    }
  }
  return split_tasks(ds, cfg.num_tasks).first;
}

// Classifier stage for task t of a trained learner: synthesize, train, evaluate.
template <typename T>
TaskMetrics classify_and_evaluate(const LearnerState<T>& state, std::size_t t, std::uint64_t seed,
                                  std::size_t* classifier_parameters = nullptr) {
  const auto& cfg = state.config;
  const auto synth = synthesize_classifier_set(state, t, cfg.n_classifier_per_class, Rng::derive(seed, 500 + t));
  const auto clf = train_classifier(synth, state.dataset->num_classes(), cfg, Rng::derive(seed, 600 + t), t);
  if (classifier_parameters) *classifier_parameters = clf.net.num_parameters();
  return evaluate_after_task(clf, *state.dataset, state.spec, t, cfg.averaging);
}

// Called after each task with (seed, metrics, learner).
using TaskObserver = std::function<void(std::uint64_t, const TaskMetrics&, const LearnerState<Real>&)>;

inline SeedResult run_seed(const ExperimentConfig& cfg, std::shared_ptr<const FeatureDataset> ds,
                           const TaskSpec& spec, std::uint64_t seed, const TaskObserver& observer = {}) {
  const auto start = std::chrono::steady_clock::now();
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  auto state = LearnerState<Real>::start(ds, spec, tc);
  const auto views = make_task_views(*ds, spec);
  SeedResult out;
  out.seed = seed;
  std::vector<TaskMetrics> per_task;
  for (const auto& view : views) {
    try {
      const auto& log = train_task(state, view);
      const auto m = classify_and_evaluate(state, view.task_index, seed, &out.classifier_parameters);
      std::ostringstream msg;
      msg << "seed " << seed << " task " << view.task_index << "/" << views.size() << ": rows " << log.real_rows
          << "+" << log.replay_rows << " loss " << log.epoch_means.front().total << " -> "
          << log.epoch_means.back().total << ", S=" << m.seen_acc;
      if (m.unseen_acc) msg << " U=" << *m.unseen_acc << " H=" << *m.harmonic_acc;
      log_info(msg.str());
      per_task.push_back(m);
      if (observer) observer(seed, m, state);
    } catch (const std::exception& e) {
      throw Error("task " + std::to_string(view.task_index) + " (seed " + std::to_string(seed) + "): " + e.what());
    }
  }
  for (const auto& m : state.modules) out.module_parameters.push_back(m.num_parameters());
  out.report = summarize(per_task);
  if (cfg.save_checkpoints && !cfg.output_dir.empty())
    save_learner(state, fs::path(cfg.output_dir) / "checkpoints" / ("seed_" + std::to_string(seed)));
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline RunRecord run_experiment(const ExperimentConfig& cfg, const TaskObserver& observer = {}) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  auto ds = std::make_shared<const FeatureDataset>(load_experiment_dataset(cfg));
  const auto spec = experiment_tasks(cfg, *ds);
  RunRecord rec;
  rec.config_echo = to_json(cfg);
  for (auto seed : cfg.seeds) rec.seeds.push_back(run_seed(cfg, ds, spec, seed, observer));
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

// --- reporting ----------------------------------------------------------------

// Fraction -> percent with two decimals, as text.
inline std::string pct(double fraction) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << fraction * 100.0;
  return os.str();
}

// Fraction -> percent rounded to two decimals, as a number.
inline double pct_value(double fraction) { return std::round(fraction * 10000.0) / 100.0; }

inline std::string per_task_csv(const RunRecord& r) {
  std::ostringstream os;
  os << "seed,task,seen_acc,unseen_acc,harmonic\n";
  for (const auto& s : r.seeds)
    for (const auto& m : s.report.per_task)
      os << s.seed << ',' << m.t << ',' << pct(m.seen_acc) << ',' << (m.unseen_acc ? pct(*m.unseen_acc) : "")
         << ',' << (m.harmonic_acc ? pct(*m.harmonic_acc) : "") << '\n';
  return os.str();
}

// Seed-averaged per-task curves.
inline std::string curves_csv(const RunRecord& r) {
  std::ostringstream os;
  os << "task,seen_acc,unseen_acc,harmonic\n";
  if (r.seeds.empty()) return os.str();
  const auto tasks = r.seeds.front().report.per_task.size();
  const auto n = static_cast<double>(r.seeds.size());
  for (std::size_t k = 0; k < tasks; ++k) {
    double s = 0, u = 0, h = 0;
    bool has_u = false;
    for (const auto& seed : r.seeds) {
      const auto& m = seed.report.per_task[k];
      s += m.seen_acc;
      if (m.unseen_acc) {
        has_u = true;
        u += *m.unseen_acc;
        h += *m.harmonic_acc;
      }
    }
    os << k + 1 << ',' << pct(s / n) << ',' << (has_u ? pct(u / n) : "") << ',' << (has_u ? pct(h / n) : "")
       << '\n';
  }
  return os.str();
}

inline nlohmann::ordered_json summary_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["msa"] = pct_value(r.mean_msa());
  j["mua"] = pct_value(r.mean_mua());
  j["mh"] = pct_value(r.mean_mh());
  j["per_seed"] = nlohmann::ordered_json::array();
  for (const auto& s : r.seeds)
    j["per_seed"].push_back({{"seed", s.seed},
                             {"msa", pct_value(s.report.msa)},
                             {"mua", pct_value(s.report.mua)},
                             {"mh", pct_value(s.report.mh)}});
  j["config"] = r.config_echo;
  return j;
}

// Non-deterministic run facts (timings, sizes) kept out of summary.json.
inline nlohmann::ordered_json run_info_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["wall_seconds"] = r.wall_seconds;
  j["seeds"] = nlohmann::ordered_json::array();
  for (const auto& s : r.seeds)
    j["seeds"].push_back({{"seed", s.seed},
                          {"wall_seconds", s.wall_seconds},
                          {"module_parameters", s.module_parameters},
                          {"classifier_parameters", s.classifier_parameters}});
  return j;
}

/// Writes per_task.csv, summary.json, curves.csv and run_info.json into `dir`.
inline void emit_report(const RunRecord& r, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir, "cannot create output directory: " + ec.message());
  write_file_text(dir / "per_task.csv", per_task_csv(r));
  write_file_text(dir / "summary.json", summary_json(r).dump(2) + "\n");
  write_file_text(dir / "curves.csv", curves_csv(r));
  write_file_text(dir / "run_info.json", run_info_json(r).dump(2) + "\n");
}

struct SweepRow {
  std::size_t replay = 0;
  RunRecord record;
};

/// One full experiment per replay count; the config is otherwise unchanged.
inline std::vector<SweepRow> sweep_replay(const ExperimentConfig& cfg, const std::vector<std::size_t>& values,
                                          const TaskObserver& observer = {}) {
  std::vector<SweepRow> rows;
  for (auto n : values) {
    ExperimentConfig c = cfg;
    c.train.n_replay_per_class = n;
    c.save_checkpoints = false;
    log_info("replay sweep: n=" + std::to_string(n));
    rows.push_back({n, run_experiment(c, observer)});
  }
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "replay,msa,mua,mh\n";
  for (const auto& r : rows)
    os << r.replay << ',' << pct(r.record.mean_msa()) << ',' << pct(r.record.mean_mua()) << ','
       << pct(r.record.mean_mh()) << '\n';
  return os.str();
}

}  // namespace czsl
