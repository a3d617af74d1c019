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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "alseg/config.h"
#include "alseg/data.h"
#include "alseg/errors.h"
#include "test_util.h"
#include "json.hpp"

namespace alseg {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Spit(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

int Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "alseg");
  return RunCli(args);
}

// Silences and returns stderr of one CLI call.
std::pair<int, std::string> CliErr(std::vector<std::string> args) {
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  const int code = Cli(std::move(args));
  ::testing::internal::GetCapturedStdout();
  return {code, ::testing::internal::GetCapturedStderr()};
}

ExperimentConfig NonDefaultConfig() {
  ExperimentConfig c;
  c.dataset = "data/x";
  c.methods = {{AcquisitionMethod::kJsd, true},
               {AcquisitionMethod::kMaxCover, false}};
  c.q = 2;
  c.n_iters = 7;
  c.steps = 11;
  c.particles = 3;
  c.batch_size = 4;
  c.epsilon = 0.125;
  c.alpha = 2.5;
  c.bins = 16;
  c.mode = TrainerMode::kEnsemble;
  c.arch = ArchKind::kEncoderDecoder;
  c.filters = 6;
  c.smoothing = 1e-3;
  c.max_multiplicity = 3;
  c.seeds = {4, 9, 1};
  c.out = "elsewhere";
  return c;
}

TEST(ConfigTest, RoundTrip) {
  const ExperimentConfig c = NonDefaultConfig();
  EXPECT_EQ(ParseExperimentConfig(SerializeExperimentConfig(c)), c);
  ExperimentConfig d;
  d.methods = {{}};
  EXPECT_EQ(ParseExperimentConfig(SerializeExperimentConfig(d)), d);
}

TEST(ConfigTest, Defaults) {
  const ExperimentConfig c = ParseExperimentConfig(
      R"({"methods": [{"method": "epistemic+mi"}]})");
  EXPECT_EQ(c.n_iters, 40u);
  EXPECT_EQ(c.particles, 5u);
  EXPECT_EQ(c.batch_size, 8u);
  EXPECT_EQ(c.steps, 300u);
  EXPECT_EQ(c.alpha, 1.0);
  EXPECT_EQ(c.bins, 32u);
  EXPECT_FALSE(c.methods[0].delete_flag);
}

TEST(ConfigTest, StrictRejection) {
  const char* bad[] = {
      R"({"methods": [{"method": "random"}], "n_iter": 3})",
      R"({"methods": [{"method": "random", "delet": true}]})",
      R"({"methods": [{"method": "entropy"}]})",
      R"({"methods": []})",
      R"({"methods": [{"method": "random"}], "q": 0})",
      R"({"methods": [{"method": "random"}], "q": -1})",
      R"({"methods": [{"method": "random"}], "epsilon": "big"})",
      R"({"methods": [{"method": "random"}], "seeds": [1, 1]})",
      R"({"methods": [{"method": "random"}], "seeds": []})",
      R"({"methods": [{"method": "random"}, {"method": "random"}]})",
      R"([1, 2])",
      R"({"methods": )",
  };
  for (const char* text : bad) {
    EXPECT_THROW(ParseExperimentConfig(text), ConfigError) << text;
  }
}

TEST(ConfigTest, UnknownMethodListsValidNames) {
  try {
    ParseExperimentConfig(R"({"methods": [{"method": "entropy"}]})");
    FAIL();
  } catch (const ConfigError& e) {
    for (const auto& name : MethodNames()) {
      EXPECT_NE(std::string(e.what()).find(name), std::string::npos) << name;
    }
  }
}

TEST(ConfigTest, RunNameAndManifest) {
  const MethodSpec spec{AcquisitionMethod::kEpistemicMI, false};
  EXPECT_EQ(RunName(spec, 3), "epistemic+mi_nodelete_3");
  EXPECT_EQ(RunName({AcquisitionMethod::kRandom, true}, 12), "random_delete_12");
  const auto m = nlohmann::json::parse(
      RunManifestJson(NonDefaultConfig(), spec, 3, {0.0, 1.0}, 65, ""));
  for (const char* key : {"method", "delete", "q", "n_iters", "steps", "M",
                          "epsilon", "alpha", "bins", "seed",
                          "dataset_path"}) {
    EXPECT_TRUE(m.contains(key)) << key;
  }
  EXPECT_EQ(m["M"], 3);
  EXPECT_EQ(m["method"], "epistemic+mi");
  EXPECT_EQ(m["delete"], false);
}

// Shared 32x32 dataset with 23 samples and a tiny experiment config.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new testing::TempDir("cli");
    ::testing::internal::CaptureStdout();
    ASSERT_EQ(Cli({"gen", "--out", (root_->path() / "data").string(),
                   "--seed", "3", "--n", "23"}),
              kExitOk);
    ::testing::internal::GetCapturedStdout();
  }
  static void TearDownTestSuite() { delete root_; }

  static fs::path Data() { return root_->path() / "data"; }

  fs::path WriteConfig(const std::string& name, const std::string& methods,
                       const std::string& seeds = "[1, 2]",
                       const std::string& extra = "") {
    const fs::path p = root_->path() / (name + ".json");
    Spit(p, R"({"dataset": ")" + Data().string() + R"(", "methods": )" +
                methods + R"(, "seeds": )" + seeds +
                R"(, "n_iters": 2, "steps": 2, "particles": 2,
                    "batch_size": 2, "filters": 2)" +
                extra + "}");
    return p;
  }

  static testing::TempDir* root_;
};

testing::TempDir* CliTest::root_ = nullptr;

TEST_F(CliTest, GenWritesDatasetDeterministically) {
  const Dataset d = LoadDataset(Data());
  EXPECT_EQ(d.samples.size(), 23u);
  EXPECT_EQ(d.split.initial_train.size() + d.split.unlabeled.size() +
                d.split.validation.size() + d.split.test.size(),
            23u);
  testing::TempDir again("gen_again");
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(Cli({"gen", "--out", again.path().string(), "--seed", "3", "--n",
                 "23"}),
            kExitOk);
  const std::string out = ::testing::internal::GetCapturedStdout();
  EXPECT_NE(out.find("N=23"), std::string::npos);
  EXPECT_NE(out.find("latent classes"), std::string::npos);
  EXPECT_EQ(Slurp(again.path() / "meta.json"), Slurp(Data() / "meta.json"));
  size_t images = 0;
  for (const auto& e : fs::directory_iterator(again.path() / "images")) {
    images += e.path().extension() == ".tsr";
  }
  EXPECT_EQ(images, 23u);
}

TEST_F(CliTest, GenFullSizeDataset) {
  testing::TempDir dir("gen_full");
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(Cli({"gen", "--out", dir.path().string(), "--seed", "1", "--n",
                 "105"}),
            kExitOk);
  ::testing::internal::GetCapturedStdout();
  const Dataset d = LoadDataset(dir.path());
  EXPECT_EQ(d.split.initial_train.size(), 5u);
  EXPECT_EQ(d.split.unlabeled.size(), 60u);
  EXPECT_EQ(d.split.validation.size(), 20u);
  EXPECT_EQ(d.split.test.size(), 20u);
}

TEST_F(CliTest, UsageErrors) {
  testing::TempDir dir("usage");
  const std::string out = (dir.path() / "d").string();
  EXPECT_EQ(CliErr({"gen", "--out", out, "--mix", "0.5,0.5"}).first,
            kExitUsage);
  EXPECT_EQ(CliErr({"gen", "--out", out, "--mix", "0.5,0.5,0.5"}).first,
            kExitUsage);
  EXPECT_EQ(CliErr({"gen", "--out", out, "--n", "zero"}).first, kExitUsage);
  EXPECT_EQ(CliErr({}).first, kExitUsage);
  EXPECT_EQ(CliErr({"frobnicate"}).first, kExitUsage);
  EXPECT_EQ(CliErr({"run"}).first, kExitUsage);  // no --config
  EXPECT_EQ(CliErr({"run", "--config", "/nonexistent.json"}).first,
            kExitUsage);
  EXPECT_EQ(CliErr({"report"}).first, kExitUsage);
  EXPECT_EQ(CliErr({"--format", "png", "report", out}).first, kExitUsage);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, UnknownMethodIsUsageErrorListingMethods) {
  const auto cfg = WriteConfig("unknown", R"([{"method": "entropy"}])");
  const auto [code, err] = CliErr({"run", "--config", cfg.string(), "--out",
                                   (root_->path() / "never").string()});
  EXPECT_EQ(code, kExitUsage);
  EXPECT_NE(err.find("epistemic+mi"), std::string::npos);
  EXPECT_NE(err.find("max-cover"), std::string::npos);
}

TEST_F(CliTest, GridRunReportAndEval) {
  const auto cfg = WriteConfig(
      "grid", R"([{"method": "epistemic+mi"}, {"method": "random", "delete": true}])");
  const fs::path runs = root_->path() / "runs";
  const std::string before = Slurp(Data() / "meta.json");
  ASSERT_EQ(CliErr({"run", "--config", cfg.string(), "--out", runs.string(),
                    "--jobs", "2"})
                .first,
            kExitOk);
  EXPECT_EQ(Slurp(Data() / "meta.json"), before);

  size_t dirs = 0;
  for (const auto& e : fs::directory_iterator(runs)) dirs += e.is_directory();
  EXPECT_EQ(dirs, 4u);
  const auto index = nlohmann::json::parse(Slurp(runs / "index.json"));
  ASSERT_EQ(index["runs"].size(), 4u);
  for (const auto& r : index["runs"]) EXPECT_EQ(r["status"], "completed");
  const fs::path one = runs / "epistemic+mi_nodelete_2";
  for (const char* f : {"manifest.json", "records.csv", "scores.csv",
                        "volumes.csv", "particles/0.tsr"}) {
    EXPECT_TRUE(fs::exists(one / f)) << f;
  }

  // Fresh directory, same config: byte-identical records.
  const fs::path rerun = root_->path() / "rerun";
  ASSERT_EQ(CliErr({"run", "--config", cfg.string(), "--out", rerun.string(),
                    "--jobs", "1"})
                .first,
            kExitOk);
  for (const char* name : {"epistemic+mi_nodelete_1", "random_delete_2"}) {
    EXPECT_EQ(Slurp(runs / name / "records.csv"),
              Slurp(rerun / name / "records.csv"))
        << name;
  }

  ::testing::internal::CaptureStdout();
  EXPECT_EQ(Cli({"report", runs.string()}), kExitOk);
  const std::string table = ::testing::internal::GetCapturedStdout();
  EXPECT_NE(table.find("epistemic+mi"), std::string::npos);
  EXPECT_TRUE(fs::exists(runs / "report" / "summary.csv"));
  EXPECT_TRUE(fs::exists(runs / "report" / "dice_vs_iter.svg"));

  ::testing::internal::CaptureStdout();
  EXPECT_EQ(Cli({"eval", one.string()}), kExitOk);
  const auto eval =
      nlohmann::json::parse(::testing::internal::GetCapturedStdout());
  EXPECT_EQ(eval["volumes"], 4);
  EXPECT_GE(eval["mean"].get<double>(), 0.0);
}

TEST_F(CliTest, ReportCsvOnlyAndFailedRuns) {
  const auto cfg = WriteConfig("single", R"([{"method": "epistemic"}])", "[5]");
  const fs::path runs = root_->path() / "single";
  ASSERT_EQ(CliErr({"run", "--config", cfg.string(), "--out", runs.string()})
                .first,
            kExitOk);
  // Add a failed entry by hand.
  auto index = nlohmann::json::parse(Slurp(runs / "index.json"));
  index["runs"].push_back({{"name", "random_delete_9"},
                           {"method", "random"},
                           {"delete", true},
                           {"seed", 9},
                           {"status", "failed"},
                           {"error", "boom"}});
  Spit(runs / "index.json", index.dump());
  const auto [code, err] =
      CliErr({"--format", "csv-only", "report", runs.string()});
  EXPECT_EQ(code, kExitOk);
  EXPECT_NE(err.find("random_delete_9"), std::string::npos);
  std::ifstream summary(runs / "report" / "summary.csv");
  std::string line;
  size_t lines = 0;
  while (std::getline(summary, line)) ++lines;
  EXPECT_EQ(lines, 2u);
  for (const auto& e : fs::directory_iterator(runs / "report")) {
    EXPECT_NE(e.path().extension(), ".svg") << e.path();
  }
}

TEST_F(CliTest, ReportWithoutRuns) {
  testing::TempDir empty("empty_runs");
  EXPECT_EQ(CliErr({"report", empty.path().string()}).first, kExitRuntime);
  Spit(empty.path() / "index.json", R"({"runs": []})");
  const auto [code, err] = CliErr({"report", empty.path().string()});
  EXPECT_EQ(code, kExitRuntime);
  EXPECT_NE(err.find("no completed runs"), std::string::npos);
}

TEST_F(CliTest, NumericalFailureMarksRunFailed) {
  const auto cfg = WriteConfig("blowup", R"([{"method": "random"}])", "[1]",
                               R"(, "epsilon": 1e300)");
  const fs::path runs = root_->path() / "blowup";
  EXPECT_EQ(CliErr({"run", "--config", cfg.string(), "--out", runs.string()})
                .first,
            kExitRuntime);
  const auto index = nlohmann::json::parse(Slurp(runs / "index.json"));
  EXPECT_EQ(index["runs"][0]["status"], "failed");
  EXPECT_FALSE(index["runs"][0]["error"].get<std::string>().empty());
}

}  // namespace
}  // namespace alseg
