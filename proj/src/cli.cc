// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "alseg/cli.h"

#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "alseg/errors.h"
#include "alseg/metrics.h"
#include "alseg/report.h"
#include "json.hpp"

namespace alseg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw FormatError("cannot write " + path.string());
}

json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string TimingsCsv(const std::vector<IterationRecord>& records) {
  std::ostringstream os;
  os << "iter,wallclock_seconds\n";
  for (const auto& r : records) {
    os << r.iter << "," << FormatDouble(r.wallclock_seconds) << "\n";
  }
  return os.str();
}

struct GlobalOptions {
  std::optional<uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> config;
  size_t jobs = 0;
  std::string format = "svg";
};

int CmdGen(const GlobalOptions& g, size_t n, const std::vector<double>& mix,
           const std::vector<size_t>& split, double noise) {
  if (!g.out) throw ConfigError("gen: --out is required");
  GeneratorSpec spec;
  spec.count = n;
  if (!mix.empty()) std::copy(mix.begin(), mix.end(), spec.mix.begin());
  if (noise >= 0.0) spec.noise = noise;
  SplitSizes sizes;
  if (!split.empty()) {
    sizes = {split[0], split[1], split[2], split[3]};
  } else {
    // The default 5/60/20/20 pattern scaled to n; unlabeled takes the rest.
    sizes.initial = std::max<size_t>(1, n * 5 / 105);
    sizes.validation = n * 20 / 105;
    sizes.test = n * 20 / 105;
    sizes.unlabeled = n - sizes.initial - sizes.validation - sizes.test;
  }
  const uint64_t seed = g.seed.value_or(1);
  const Dataset d = MakeDataset(spec, sizes, seed);
  SaveDataset(*g.out, d);
  size_t counts[3] = {0, 0, 0};
  for (const Sample& s : d.samples) ++counts[static_cast<int>(s.latent)];
  std::cout << "dataset " << *g.out << ": N=" << d.samples.size()
            << " seed=" << seed << "\n"
            << "split: initial=" << d.split.initial_train.size()
            << " unlabeled=" << d.split.unlabeled.size()
            << " validation=" << d.split.validation.size()
            << " test=" << d.split.test.size() << "\n"
            << "latent classes: a=" << counts[0] << " b=" << counts[1]
            << " c=" << counts[2] << "\n";
  return kExitOk;
}

int CmdRun(const GlobalOptions& g, const std::optional<std::string>& dataset) {
  if (!g.config) throw ConfigError("run: --config is required");
  ExperimentConfig config = LoadExperimentConfig(*g.config);
  if (dataset) config.dataset = *dataset;
  if (g.out) config.out = *g.out;
  if (g.seed) config.seeds = {*g.seed};
  config.Validate();
  if (config.dataset.empty()) throw ConfigError("run: no dataset path given");
  const Dataset data = LoadDataset(config.dataset);
  const auto statuses = RunGrid(config, data, config.out, g.jobs);
  bool all_ok = true;
  for (const RunStatus& s : statuses) {
    std::cout << s.name << ": " << (s.completed ? "completed" : "failed");
    if (!s.completed) std::cout << " (" << s.error << ")";
    if (!s.stop_reason.empty()) std::cout << " [" << s.stop_reason << "]";
    std::cout << "\n";
    all_ok = all_ok && s.completed;
  }
  return all_ok ? kExitOk : kExitRuntime;
}

int CmdEval(const std::string& run_dir,
            const std::optional<std::string>& dataset_override,
            const std::string& split) {
  const json manifest = ReadJson(fs::path(run_dir) / "manifest.json");
  const std::string dataset_path =
      dataset_override.value_or(manifest.value("dataset_path", std::string()));
  if (dataset_path.empty()) throw ConfigError("eval: no dataset path");
  const Dataset d = LoadDataset(dataset_path);
  const LoadedParticles loaded = LoadParticles(fs::path(run_dir) / "particles");
  const std::vector<int>& ids =
      split == "test" ? d.split.test : d.split.validation;
  const DiceReport r = EvaluateSegmentation(
      loaded.arch, loaded.set, StackImages(d, ids), StackMasks(d, ids), 1);
  json out = {{"run", run_dir},
              {"split", split},
              {"volumes", ids.size()},
              {"mean", r.mean},
              {"std", r.std},
              {"per_class_mean", r.per_class_mean}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int CmdReport(const GlobalOptions& g, const std::string& runs_dir) {
  const fs::path root(runs_dir);
  const fs::path index_path = root / "index.json";
  if (!fs::exists(index_path)) {
    std::cerr << "report: " << index_path.string()
              << " not found; run `alseg run --config <file> --out "
              << runs_dir << "` first\n";
    return kExitRuntime;
  }
  const json index = ReadJson(index_path);
  std::vector<RunData> runs;
  for (const json& r : index.at("runs")) {
    const std::string name = r.at("name").get<std::string>();
    if (r.at("status").get<std::string>() != "completed") {
      std::cerr << "warning: skipping failed run " << name << "\n";
      continue;
    }
    runs.push_back(LoadRunDir(root / name));
  }
  if (runs.empty()) {
    std::cerr << "report: no completed runs under " << runs_dir
              << "; check index.json for run errors and rerun\n";
    return kExitRuntime;
  }
  const fs::path out = g.out ? fs::path(*g.out) : root / "report";
  const Report report = EmitReport(runs, out, g.format != "csv-only");
  std::cout << SummaryTable(report);
  return kExitOk;
}

}  // namespace

RunStatus RunCell(const ExperimentConfig& config, const Dataset& dataset,
                  const MethodSpec& spec, uint64_t seed,
                  const fs::path& out_root) {
  RunStatus status;
  status.name = RunName(spec, seed);
  status.spec = spec;
  status.seed = seed;
  try {
    const fs::path dir = out_root / status.name;
    fs::create_directories(dir);
    const ActiveConfig active = ToActiveConfig(config, spec);
    const RunResult result = RunActiveLearning(dataset, active, seed);
    const size_t total = dataset.split.initial_train.size() +
                         dataset.split.unlabeled.size();
    WriteText(dir / "manifest.json",
              RunManifestJson(config, spec, seed, result.hist_edges, total,
                              result.stop_reason));
    WriteText(dir / "records.csv",
              RecordsCsv(result.records, active.hist_bins));
    WriteText(dir / "scores.csv", ScoresCsv(result.scores));
    WriteText(dir / "volumes.csv", VolumesCsv(result.volumes));
    WriteText(dir / "timings.csv", TimingsCsv(result.records));
    if (result.final_particles.size() > 0) {
      SaveParticles(dir / "particles", result.final_particles,
                    active.train.arch, active.train.steps);
    }
    status.completed = true;
    status.stop_reason = result.stop_reason;
  } catch (const std::exception& e) {
    status.error = e.what();
  }
  return status;
}

std::vector<RunStatus> RunGrid(const ExperimentConfig& config,
                               const Dataset& dataset, const fs::path& out_root,
                               size_t jobs) {
  config.Validate();
  fs::create_directories(out_root);
  std::vector<std::pair<MethodSpec, uint64_t>> cells;
  for (const MethodSpec& m : config.methods) {
    for (uint64_t s : config.seeds) cells.emplace_back(m, s);
  }
  std::vector<RunStatus> statuses(cells.size());
  const size_t workers =
      jobs == 0 ? cells.size() : std::min(jobs, cells.size());
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < cells.size(); i = next++) {
      statuses[i] = RunCell(config, dataset, cells[i].first, cells[i].second,
                            out_root);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  json runs = json::array();
  for (const RunStatus& s : statuses) {
    json r = {{"name", s.name},
              {"method", MethodName(s.spec.method)},
              {"delete", s.spec.delete_flag},
              {"seed", s.seed},
              {"status", s.completed ? "completed" : "failed"}};
    if (!s.error.empty()) r["error"] = s.error;
    if (!s.stop_reason.empty()) r["stop_reason"] = s.stop_reason;
    runs.push_back(r);
  }
  json index = {{"config", json::parse(SerializeExperimentConfig(config))},
                {"runs", runs}};
  WriteText(out_root / "index.json", index.dump(2) + "\n");
  return statuses;
}

int RunCli(int argc, char** argv) {
  CLI::App app{"Active-learning laboratory for segmentation committees",
               "alseg"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Dataset seed (gen) or single run seed (run)");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--config", g.config, "Experiment config (JSON)");
  app.add_option("--jobs", g.jobs, "Concurrent runs; 0 = one per cell")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--format", g.format, "Report output: svg or csv-only")
      ->check(CLI::IsMember({"svg", "csv-only"}));

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  size_t n = 105;
  std::vector<double> mix;
  std::vector<size_t> split;
  double noise = -1.0;
  gen->add_option("--n", n, "Number of samples")->check(CLI::PositiveNumber);
  gen->add_option("--mix", mix, "Latent class weights a,b,c")
      ->expected(3)
      ->delimiter(',');
  gen->add_option("--split", split, "initial,unlabeled,validation,test")
      ->expected(4)
      ->delimiter(',');
  gen->add_option("--noise", noise, "Pixel noise sigma")
      ->check(CLI::NonNegativeNumber);

  auto* run = app.add_subcommand("run", "Run the methods x seeds grid");
  std::optional<std::string> dataset;
  run->add_option("--dataset", dataset, "Dataset directory (overrides config)");

  auto* eval = app.add_subcommand("eval", "Evaluate a run's final committee");
  std::string run_dir;
  std::string eval_split = "test";
  eval->add_option("run_dir", run_dir, "Run directory")->required();
  eval->add_option("--dataset", dataset, "Dataset directory override");
  eval->add_option("--split", eval_split, "test or validation")
      ->check(CLI::IsMember({"test", "validation"}));

  auto* report = app.add_subcommand("report", "Summarise completed runs");
  std::string runs_dir;
  report->add_option("runs_dir", runs_dir, "Directory holding index.json")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return CmdGen(g, n, mix, split, noise);
    if (*run) return CmdRun(g, dataset);
    if (*eval) return CmdEval(run_dir, dataset, eval_split);
    if (*report) return CmdReport(g, runs_dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

int RunCli(const std::vector<std::string>& args) {
  std::vector<std::string> storage = args;
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  return RunCli(static_cast<int>(storage.size()), argv.data());
}

}  // namespace alseg
