#pragma once

// Command-line front end. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "czsl/data/dataset.hpp"
#include "czsl/data/synthetic.hpp"
#include "czsl/data/tasks.hpp"
#include "czsl/harness/experiment.hpp"
#include "czsl/learner/continual_learner.hpp"
#include "czsl/nn/checkpoint.hpp"

namespace czsl {

namespace cli_detail {

struct UsageError : Error {
  using Error::Error;
};

// Flags shared by `run` and `sweep-replay`.
struct RunFlags {
  std::string config;
  std::string out;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> replay;
  bool no_aux_losses = false;
  std::optional<std::size_t> tasks;
  std::optional<std::size_t> epochs;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "Experiment config (JSON)")->required();
    cmd->add_option("--out", out, "Output directory (overrides config)");
    cmd->add_option("--seed", seeds, "Seed; repeat for several (overrides config)")->take_all();
    cmd->add_option("--replay", replay, "Replayed samples per past class");
    cmd->add_flag("--no-aux-losses", no_aux_losses, "Train without the label/embedding losses");
    cmd->add_option("--tasks", tasks, "Number of tasks");
    cmd->add_option("--epochs", epochs, "Training epochs per task");
  }

  ExperimentConfig resolve() const {
    if (!fs::exists(config)) throw UsageError("config file not found: " + config);
    ExperimentConfig cfg = load_experiment_config(config);
    if (!out.empty()) cfg.output_dir = out;
    if (!seeds.empty()) cfg.seeds = seeds;
    if (replay) cfg.train.n_replay_per_class = *replay;
    if (no_aux_losses) cfg.train.use_aux_losses = false;
    if (tasks) cfg.num_tasks = *tasks;
    if (epochs) cfg.train.epochs = *epochs;
    cfg.validate();
    if (cfg.output_dir.empty()) throw UsageError("no output directory: pass --out or set \"out\" in the config");
    return cfg;
  }
};

inline std::vector<std::size_t> parse_values(const std::string& s) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok.empty()) throw UsageError("bad --values list '" + s + "'");
    out.push_back(std::stoul(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline nlohmann::ordered_json inspect(const fs::path& path) {
  nlohmann::ordered_json j;
  if (fs::is_regular_file(path)) {
    const auto ck = nn::load_checkpoint<float>(path);
    j["kind"] = "parameters";
    j["header"] = nn::checkpoint_header(ck.params, ck.step);
    j["num_parameters"] = ck.params.num_parameters();
    return j;
  }
  if (fs::exists(path / "module.json")) {
    const auto m = load_module<float>(path);
    j["kind"] = "module";
    j["descriptor"] = module_descriptor(m);
    j["num_parameters"] = m.num_parameters();
    j["hash"] = m.frozen ? module_hash(m) : 0;
    return j;
  }
  if (fs::exists(path / "manifest.json")) {
    const auto manifest = nlohmann::ordered_json::parse(read_file_text(path / "manifest.json"));
    j["kind"] = "learner";
    j["manifest"] = manifest;
    j["modules"] = nlohmann::ordered_json::array();
    for (const auto& name : manifest.at("modules")) {
      const auto m = load_module<float>(path / name.get<std::string>());
      j["modules"].push_back({{"name", name}, {"task_id", m.task_id}, {"num_parameters", m.num_parameters()},
                              {"hash", module_hash(m)}});
    }
    return j;
  }
  throw UsageError("not a checkpoint: " + path.string());
}

}  // namespace cli_detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"Continual zero-shot learning with per-task conditional VAEs and generative replay", "czsl"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Train all tasks and write per-task metrics");
  run_flags.attach(run);

  RunFlags sweep_flags;
  std::string sweep_values = "0,10,20,30,40,50,60";
  auto* sweep = app.add_subcommand("sweep-replay", "Repeat `run` over several replay counts");
  sweep_flags.attach(sweep);
  sweep->add_option("--values", sweep_values, "Comma-separated replay counts")->capture_default_str();

  std::size_t syn_classes = 8, syn_tasks = 0, syn_attr = 4, syn_feat = 16, syn_per_class = 40;
  double syn_noise = 0.3;
  std::uint64_t syn_seed = 0;
  std::string syn_out;
  auto* synth = app.add_subcommand("synth-data", "Write a synthetic dataset container");
  synth->add_option("--classes", syn_classes, "Number of classes")->capture_default_str();
  synth->add_option("--tasks", syn_tasks, "Also write tasks.json with this many tasks");
  synth->add_option("--attr-dim", syn_attr, "Attribute dimension")->capture_default_str();
  synth->add_option("--feature-dim", syn_feat, "Feature dimension")->capture_default_str();
  synth->add_option("--samples-per-class", syn_per_class, "Samples per class")->capture_default_str();
  synth->add_option("--noise", syn_noise, "Cluster noise scale")->capture_default_str();
  synth->add_option("--seed", syn_seed, "Seed")->capture_default_str();
  synth->add_option("--out", syn_out, "Output directory")->required();

  std::string eval_config, eval_ckpt, eval_out;
  std::optional<std::uint64_t> eval_seed;
  auto* eval = app.add_subcommand("eval", "Evaluate a saved learner checkpoint");
  eval->add_option("--config", eval_config, "Experiment config naming the dataset")->required();
  eval->add_option("--checkpoint", eval_ckpt, "Learner checkpoint directory")->required();
  eval->add_option("--out", eval_out, "Output directory")->required();
  eval->add_option("--seed", eval_seed, "Classifier seed (default: the checkpoint's seed)");

  std::string inspect_path;
  auto* insp = app.add_subcommand("inspect-checkpoint", "Describe a parameter, module, or learner checkpoint");
  insp->add_option("path", inspect_path, "Checkpoint file or directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*run) {
      const auto cfg = run_flags.resolve();
      const auto rec = run_experiment(cfg);
      emit_report(rec, cfg.output_dir);
      out << "mSA " << pct(rec.mean_msa()) << "  mUA " << pct(rec.mean_mua()) << "  mH " << pct(rec.mean_mh())
          << "\nwrote " << cfg.output_dir << "\n";
    } else if (*sweep) {
      const auto cfg = sweep_flags.resolve();
      const auto rows = sweep_replay(cfg, parse_values(sweep_values));
      fs::create_directories(cfg.output_dir);
      write_file_text(fs::path(cfg.output_dir) / "sweep.csv", sweep_csv(rows));
      for (const auto& r : rows) emit_report(r.record, fs::path(cfg.output_dir) / ("replay_" + std::to_string(r.replay)));
      out << sweep_csv(rows);
    } else if (*synth) {
      auto spec = SyntheticSpec::with_random_map(syn_classes, syn_attr, syn_feat, syn_per_class, syn_noise, syn_seed);
      const auto ds = make_synthetic_dataset(spec);
      write_dataset(ds, syn_out);
      if (syn_tasks > 0)
        write_file_text(fs::path(syn_out) / "tasks.json", task_spec_to_json(split_tasks(ds, syn_tasks).first).dump() + "\n");
      out << "wrote " << ds.num_classes() << " classes, " << ds.num_train() << " train + " << ds.num_test()
          << " test samples to " << syn_out << "\n";
    } else if (*eval) {
      if (!fs::exists(eval_config)) throw UsageError("config file not found: " + eval_config);
      auto cfg = load_experiment_config(eval_config);
      auto ds = std::make_shared<const FeatureDataset>(load_experiment_dataset(cfg));
      const auto state = load_learner<Real>(eval_ckpt, ds);
      const std::uint64_t seed = eval_seed.value_or(state.config.seed);
      std::vector<TaskMetrics> per_task;
      for (std::size_t t = 1; t <= state.tasks_trained(); ++t) per_task.push_back(classify_and_evaluate(state, t, seed));
      RunRecord rec;
      cfg.seeds = {seed};
      cfg.train = state.config;
      rec.config_echo = to_json(cfg);
      rec.seeds.push_back({seed, summarize(per_task), 0.0, {}, 0});
      emit_report(rec, eval_out);
      out << "mSA " << pct(rec.mean_msa()) << "  mUA " << pct(rec.mean_mua()) << "  mH " << pct(rec.mean_mh())
          << "\nwrote " << eval_out << "\n";
    } else if (*insp) {
      out << inspect(inspect_path).dump(2) << "\n";
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace czsl
