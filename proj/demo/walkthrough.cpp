// Trains a continual learner on a small synthetic dataset task by task and
// prints seen/unseen accuracy after each task.
//
//   czsl_demo [epochs]

#include <iostream>
#include <memory>
#include <string>

#include "czsl/czsl.hpp"

using namespace czsl;

int main(int argc, char** argv) {
  const std::size_t epochs = argc > 1 ? std::stoul(argv[1]) : 30;

  // 12 classes whose feature centers are a linear map of their attributes
  auto ds = std::make_shared<const FeatureDataset>(
      make_synthetic_dataset(SyntheticSpec::with_random_map(12, 6, 24, 50, 0.3, 1)));
  const auto [spec, views] = split_tasks(*ds, 3);

  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.lr = 1e-3;
  cfg.classifier_lr = 1e-3;
  cfg.classifier_epochs = 15;
  cfg.z_dim = 8;
  cfg.hidden = {{128}, {128}, {64}};
  cfg.classifier_hidden = 128;
  cfg.seed = 0;

  auto state = LearnerState<float>::start(ds, spec, cfg);
  std::vector<TaskMetrics> per_task;
  for (const auto& view : views) {
    const auto& log = train_task(state, view);
    std::cout << "task " << view.task_index << ": " << log.real_rows << " real + " << log.replay_rows
              << " replayed rows, loss " << log.epoch_means.front().total << " -> " << log.epoch_means.back().total
              << "\n";

    const auto m = classify_and_evaluate(state, view.task_index, cfg.seed);
    std::cout << "  seen " << pct(m.seen_acc) << "%";
    if (m.unseen_acc) std::cout << "  unseen " << pct(*m.unseen_acc) << "%  H " << pct(*m.harmonic_acc) << "%";
    std::cout << "\n";
    per_task.push_back(m);
  }

  const auto r = summarize(per_task);
  std::cout << "mSA " << pct(r.msa) << "  mUA " << pct(r.mua) << "  mH " << pct(r.mh) << "\n";
  std::cout << state.tasks_trained() << " frozen modules, " << state.modules.front().num_parameters()
            << " parameters each\n";
}
