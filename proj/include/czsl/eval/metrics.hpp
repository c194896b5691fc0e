#pragma once

// Continual zero-shot metrics. After task t the seen accuracy S_t covers test
// samples of tasks <= t and the unseen accuracy U_t covers tasks > t (absent
// after the last task). Summary values are plain means over tasks:
//
//   mSA = mean(S_1..S_T)   mUA = mean(U_1..U_{T-1})   mH = mean(H_1..H_{T-1})
//
// mH averages the per-task harmonic means; it is not the harmonic mean of
// mSA and mUA. All values are fractions in [0, 1].

#include <optional>
#include <string>
#include <vector>

#include "czsl/classifier/classifier.hpp"
#include "czsl/data/dataset.hpp"
#include "czsl/data/tasks.hpp"

namespace czsl {

inline double harmonic(double s, double u) {
  const double denom = s + u;
  return denom > 0.0 ? 2.0 * s * u / denom : 0.0;
}

struct TaskMetrics {
  std::size_t t = 0;
  double seen_acc = 0.0;
  std::optional<double> unseen_acc;
  std::optional<double> harmonic_acc;

  bool operator==(const TaskMetrics&) const = default;
};

struct MetricsReport {
  std::vector<TaskMetrics> per_task;
  double msa = 0.0;
  double mua = 0.0;
  double mh = 0.0;
};

// Metrics from already-computed predictions on the full test split.
inline TaskMetrics metrics_from_predictions(const Labels& predicted, const Labels& truth, const TaskSpec& spec,
                                            std::size_t t,
                                            AccuracyAveraging averaging = AccuracyAveraging::per_class) {
  if (t < 1 || t > spec.num_tasks())
    throw Error("evaluate_after_task: t=" + std::to_string(t) + " out of range");
  const auto part = seen_unseen_partition(spec, t);
  TaskMetrics m;
  m.t = t;
  m.seen_acc = accuracy_from_predictions(predicted, truth, part.seen, averaging);
  if (!part.unseen.empty()) {
    m.unseen_acc = accuracy_from_predictions(predicted, truth, part.unseen, averaging);
    m.harmonic_acc = harmonic(m.seen_acc, *m.unseen_acc);
  }
  return m;
}

template <typename T>
TaskMetrics evaluate_after_task(const ClassifierParams<T>& classifier, const FeatureDataset& ds,
                                const TaskSpec& spec, std::size_t t,
                                AccuracyAveraging averaging = AccuracyAveraging::per_class) {
  const Labels predicted = predict(classifier, ds.features_test.cast<T>().eval());
  return metrics_from_predictions(predicted, ds.labels_test, spec, t, averaging);
}

inline MetricsReport summarize(const std::vector<TaskMetrics>& per_task) {
  const std::size_t n = per_task.size();
  if (n < 2) throw Error("summarize: need at least 2 tasks, got " + std::to_string(n));
  MetricsReport r;
  r.per_task = per_task;
  double s = 0.0, u = 0.0, h = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& m = per_task[k];
    if (m.t != k + 1) throw Error("summarize: entry " + std::to_string(k) + " has t=" + std::to_string(m.t));
    s += m.seen_acc;
    if (k + 1 < n) {
      if (!m.unseen_acc || !m.harmonic_acc)
        throw Error("summarize: task " + std::to_string(m.t) + " lacks unseen/harmonic accuracy");
      u += *m.unseen_acc;
      h += *m.harmonic_acc;
    } else if (m.unseen_acc || m.harmonic_acc) {
      throw Error("summarize: last task must not carry unseen/harmonic accuracy");
    }
  }
  r.msa = s / static_cast<double>(n);
  r.mua = u / static_cast<double>(n - 1);
  r.mh = h / static_cast<double>(n - 1);
  return r;
}

}  // namespace czsl
