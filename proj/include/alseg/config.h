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

#ifndef ALSEG_CONFIG_H_
#define ALSEG_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "alseg/pool.h"

namespace alseg {

struct MethodSpec {
  AcquisitionMethod method = AcquisitionMethod::kEpistemicMI;
  bool delete_flag = false;
  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

// "delete" or "nodelete".
std::string DeleteTag(bool delete_flag);
// Directory name of one run: <method>_<delete tag>_<seed>.
std::string RunName(const MethodSpec& spec, uint64_t seed);

struct ExperimentConfig {
  std::string dataset;
  std::vector<MethodSpec> methods;
  size_t q = 1;
  size_t n_iters = 40;
  size_t steps = 300;
  size_t particles = 5;
  size_t batch_size = 8;
  double epsilon = 0.5;
  double alpha = 1.0;
  size_t bins = kDefaultBins;
  TrainerMode mode = TrainerMode::kSvgd;
  ArchKind arch = ArchKind::kFlat;
  size_t filters = 8;
  double smoothing = kTrainingSmoothing;
  size_t max_multiplicity = 0;
  std::vector<uint64_t> seeds = {1};
  std::string out = "runs";

  // Throws ConfigError on non-positive numbers, empty or duplicate seeds,
  // empty or duplicate methods.
  void Validate() const;
  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

// Strict parse: unknown keys, wrong types and invalid values throw
// ConfigError. Missing keys keep their defaults.
ExperimentConfig ParseExperimentConfig(const std::string& json_text);
std::string SerializeExperimentConfig(const ExperimentConfig& config);
ExperimentConfig LoadExperimentConfig(const std::string& path);

ActiveConfig ToActiveConfig(const ExperimentConfig& config,
                            const MethodSpec& spec);

// Manifest written next to records.csv.
std::string RunManifestJson(const ExperimentConfig& config,
                            const MethodSpec& spec, uint64_t seed,
                            const std::vector<double>& hist_edges,
                            size_t total_available,
                            const std::string& stop_reason);

}  // namespace alseg

#endif  // ALSEG_CONFIG_H_
