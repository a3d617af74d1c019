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

#ifndef ALSEG_CLI_H_
#define ALSEG_CLI_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alseg/config.h"
#include "alseg/data.h"

namespace alseg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

struct RunStatus {
  std::string name;
  MethodSpec spec;
  uint64_t seed = 0;
  bool completed = false;
  std::string error;
  std::string stop_reason;
};

// Runs one (method, delete, seed) cell into out_root/<run name>/.
RunStatus RunCell(const ExperimentConfig& config, const Dataset& dataset,
                  const MethodSpec& spec, uint64_t seed,
                  const std::filesystem::path& out_root);

// Runs the methods x seeds grid on up to `jobs` threads (0 = one per cell),
// then writes out_root/index.json. Failed cells do not stop the others.
std::vector<RunStatus> RunGrid(const ExperimentConfig& config,
                               const Dataset& dataset,
                               const std::filesystem::path& out_root,
                               size_t jobs);

// Command-line entry point; returns the process exit code.
int RunCli(int argc, char** argv);
int RunCli(const std::vector<std::string>& args);

}  // namespace alseg

#endif  // ALSEG_CLI_H_
