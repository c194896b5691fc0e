#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "czsl/harness/cli.hpp"
#include "czsl/harness/experiment.hpp"

using namespace czsl;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("czsl_harness_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct CliResult {
  int code;
  std::string out, err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "czsl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json tiny_experiment() {
  return nlohmann::json::parse(R"({
    "dataset": {"synthetic": {"classes": 8, "attr_dim": 4, "feature_dim": 8,
                              "samples_per_class": 15, "noise": 0.3, "seed": 1}},
    "num_tasks": 4,
    "train": {"epochs": 2, "classifier_epochs": 2, "z_dim": 3, "n_replay_per_class": 5,
              "n_classifier_per_class": 10, "hidden": {"encoder": [8], "decoder": [8], "aux": [8]},
              "classifier_hidden": 8},
    "seeds": [0, 1]
  })");
}

RunRecord fake_record() {
  RunRecord r;
  r.config_echo = {{"note", "fixture"}};
  for (std::uint64_t seed : {3, 4}) {
    std::vector<TaskMetrics> per_task;
    for (std::size_t t = 1; t <= 4; ++t) {
      TaskMetrics m;
      m.t = t;
      m.seen_acc = 0.9 - 0.1 * static_cast<double>(t) + 0.01 * static_cast<double>(seed);
      if (t < 4) {
        m.unseen_acc = 0.1 * static_cast<double>(t);
        m.harmonic_acc = harmonic(m.seen_acc, *m.unseen_acc);
      }
      per_task.push_back(m);
    }
    r.seeds.push_back({seed, summarize(per_task), 1.5, {10, 10}, 20});
  }
  return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::size_t pos = 0;
    for (;;) {
      const auto comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(ExperimentConfig, ParseAndEchoRoundTrip) {
  const auto cfg = experiment_config_from_json(tiny_experiment());
  EXPECT_EQ(cfg.num_tasks, 4u);
  EXPECT_EQ(cfg.synthetic.classes, 8u);
  EXPECT_EQ(cfg.train.epochs, 2u);
  EXPECT_EQ(cfg.train.lr, 1e-4);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{0, 1}));
  const auto again = experiment_config_from_json(nlohmann::json::parse(to_json(cfg).dump()));
  EXPECT_EQ(to_json(again), to_json(cfg));
}

TEST(ExperimentConfig, RejectsUnknownKeysAndBadValues) {
  auto j = tiny_experiment();
  j["tasks"] = 3;
  EXPECT_THROW(experiment_config_from_json(j), Error);
  j = tiny_experiment();
  j["num_tasks"] = 1;
  EXPECT_THROW(experiment_config_from_json(j), Error);
  j = tiny_experiment();
  j["train"]["lr"] = "fast";
  EXPECT_THROW(experiment_config_from_json(j), Error);
}

TEST(Report, PerTaskCsvHasOneRowPerSeedAndTask) {
  const auto rows = parse_csv(per_task_csv(fake_record()));
  ASSERT_EQ(rows.size(), 1u + 8u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"seed", "task", "seen_acc", "unseen_acc", "harmonic"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 5u);
    const bool last = rows[i][1] == "4";
    EXPECT_EQ(rows[i][3].empty(), last);
    EXPECT_EQ(rows[i][4].empty(), last);
  }
  EXPECT_EQ(rows[1][2], "83.00");
}

TEST(Report, SummaryMatchesCsvMeans) {
  const auto rec = fake_record();
  TempDir dir("report");
  emit_report(rec, dir.path);
  for (const char* f : {"per_task.csv", "summary.json", "curves.csv", "run_info.json"})
    EXPECT_TRUE(fs::exists(dir.path / f)) << f;
  const auto summary = nlohmann::json::parse(read_file_text(dir.path / "summary.json"));
  const auto rows = parse_csv(read_file_text(dir.path / "per_task.csv"));
  double h = 0, s = 0;
  int nh = 0, ns = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    s += std::stod(rows[i][2]);
    ++ns;
    if (!rows[i][4].empty()) {
      h += std::stod(rows[i][4]);
      ++nh;
    }
  }
  EXPECT_NEAR(summary["mh"].get<double>(), h / nh, 0.01);
  EXPECT_NEAR(summary["msa"].get<double>(), s / ns, 0.01);
  EXPECT_EQ(summary["per_seed"].size(), 2u);
  EXPECT_FALSE(summary.contains("wall_seconds"));
}

TEST(Report, PercentFormatting) {
  EXPECT_EQ(pct(0.12345), "12.35");
  EXPECT_EQ(pct(1.0), "100.00");
  EXPECT_EQ(pct_value(0.123449), 12.34);
}

TEST(Cli, UnknownFlagIsUsageError) {
  const auto r = run_cli({"run", "--bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, MissingSubcommandIsUsageError) { EXPECT_EQ(run_cli({}).code, 2); }

TEST(Cli, MissingConfigFileIsUsageError) {
  const auto r = run_cli({"run", "--config", "/nonexistent/cfg.json", "--out", "/tmp/x"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("not found"), std::string::npos);
}

TEST(Cli, MalformedConfigIsRuntimeError) {
  TempDir dir("badcfg");
  write_file_text(dir.path / "c.json", "{\"num_tasks\": ");
  EXPECT_EQ(run_cli({"run", "--config", (dir.path / "c.json").string(), "--out", dir.path.string()}).code, 1);
}

TEST(Cli, SynthDataWritesLoadableContainer) {
  TempDir dir("synth");
  const auto out = dir.path / "ds";
  const auto r = run_cli({"synth-data", "--classes", "6", "--tasks", "3", "--attr-dim", "3", "--feature-dim", "5",
                          "--samples-per-class", "10", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ds = load_dataset(out);
  EXPECT_EQ(ds.num_classes(), 6u);
  EXPECT_EQ(ds.feature_dim(), 5u);
  EXPECT_EQ(ds.num_train() + ds.num_test(), 60u);
  const auto spec = load_task_override(out);
  ASSERT_TRUE(spec);
  EXPECT_EQ(spec->num_tasks(), 3u);
}

TEST(Cli, RunWritesReportAndInspectReadsCheckpoints) {
  TempDir dir("run");
  auto j = tiny_experiment();
  j["save_checkpoints"] = true;
  write_file_text(dir.path / "c.json", j.dump());
  const auto out = dir.path / "out";
  const auto r = run_cli({"run", "--config", (dir.path / "c.json").string(), "--out", out.string(), "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(parse_csv(read_file_text(out / "per_task.csv")).size(), 1u + 4u);
  const auto ckpt = out / "checkpoints" / "seed_5";
  ASSERT_TRUE(fs::exists(ckpt / "manifest.json"));

  const auto learner = run_cli({"inspect-checkpoint", ckpt.string()});
  ASSERT_EQ(learner.code, 0) << learner.err;
  const auto lj = nlohmann::json::parse(learner.out);
  EXPECT_EQ(lj["kind"], "learner");
  EXPECT_EQ(lj["modules"].size(), 4u);

  const auto module = run_cli({"inspect-checkpoint", (ckpt / "module_002").string()});
  ASSERT_EQ(module.code, 0);
  EXPECT_EQ(nlohmann::json::parse(module.out)["descriptor"]["task_id"], 2);

  const auto params = run_cli({"inspect-checkpoint", (ckpt / "module_001" / "decoder.ckpt").string()});
  ASSERT_EQ(params.code, 0);
  EXPECT_EQ(nlohmann::json::parse(params.out)["kind"], "parameters");

  EXPECT_EQ(run_cli({"inspect-checkpoint", dir.path.string()}).code, 2);

  const auto ev = run_cli({"eval", "--config", (dir.path / "c.json").string(), "--checkpoint", ckpt.string(),
                           "--out", (dir.path / "eval").string()});
  ASSERT_EQ(ev.code, 0) << ev.err;
  // same modules and classifier seed reproduce the run's metrics
  EXPECT_EQ(read_file_text(dir.path / "eval" / "per_task.csv"), read_file_text(out / "per_task.csv"));
}

TEST(Cli, NoAuxLossesFlagOnlyTouchesLabelAndEmbedWeights) {
  TempDir dir("noaux");
  auto j = tiny_experiment();
  j["train"]["lambda1"] = 0.5;
  j["train"]["lambda2"] = 2.0;
  write_file_text(dir.path / "c.json", j.dump());
  cli_detail::RunFlags flags;
  flags.config = (dir.path / "c.json").string();
  flags.out = dir.path.string();
  flags.no_aux_losses = true;
  const auto cfg = flags.resolve();
  const auto w = cfg.train.effective_weights();
  EXPECT_EQ(w.task, 0.5);
  EXPECT_EQ(w.vae, 2.0);
  EXPECT_EQ(w.label, 0.0);
  EXPECT_EQ(w.embed, 0.0);
  EXPECT_EQ(cfg.train.lambdas.label, 1.0);
}
