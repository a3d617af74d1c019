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

#ifndef ALSEG_POOL_H_
#define ALSEG_POOL_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "alseg/acquisition.h"
#include "alseg/data.h"
#include "alseg/svgd.h"
#include "alseg/tensor.h"

namespace alseg {

enum class AcquisitionMethod {
  kRandom,
  kEpistemic,
  kEpistemicMI,
  kJsd,
  kVariance,
  kMaxCover,
};

std::string MethodName(AcquisitionMethod m);
// Throws ConfigError listing the valid names.
AcquisitionMethod ParseMethod(const std::string& name);
std::vector<std::string> MethodNames();

struct PoolEntry {
  int id = 0;
  size_t multiplicity = 1;

  friend bool operator==(const PoolEntry&, const PoolEntry&) = default;
};

// Training pool T (with multiplicities), unlabeled pool U and the set of
// annotated ids. With the delete flag set, selected items leave U; without
// it they stay and may be selected again, which raises their multiplicity.
class PoolState {
 public:
  PoolState(std::vector<int> initial_train, std::vector<int> unlabeled,
            bool delete_flag, bool use_mi);

  const std::vector<PoolEntry>& training() const { return training_; }
  const std::vector<int>& unlabeled() const { return unlabeled_; }
  const std::set<int>& annotated() const { return annotated_; }
  bool delete_flag() const { return delete_flag_; }
  bool use_mi() const { return use_mi_; }
  size_t initial_training() const { return initial_training_; }
  size_t initial_unlabeled() const { return initial_unlabeled_; }
  size_t iterations_completed() const { return iterations_; }

  size_t UniqueTrainingCount() const { return training_.size(); }
  size_t TotalMultiplicity() const;
  size_t Multiplicity(int id) const;  // 0 when not in T
  bool InUnlabeled(int id) const;

  // Throws StateError if any pool invariant fails for queries of size q.
  void CheckInvariants(size_t q) const;

  friend PoolState ApplySelection(const PoolState& pool,
                                  std::span<const int> selected);

 private:
  std::vector<PoolEntry> training_;
  std::vector<int> unlabeled_;
  std::set<int> annotated_;
  bool delete_flag_;
  bool use_mi_;
  size_t initial_training_;
  size_t initial_unlabeled_;
  size_t iterations_ = 0;
};

// T <- T u Q (duplicates raise multiplicity); with delete, U <- U \ Q.
// Throws StateError if a selected id is not in U.
PoolState ApplySelection(const PoolState& pool, std::span<const int> selected);

// 100 * unique training count / total_available.
double PercentDataUsed(const PoolState& pool, size_t total_available);

// Simulated annotator. Charged only for ids it has not labeled before.
class Oracle {
 public:
  Oracle(std::map<int, NDArray> labels, std::span<const int> pre_annotated);

  // Throws LookupError for unknown ids.
  std::vector<std::pair<int, NDArray>> Annotate(std::span<const int> ids);
  size_t annotation_count() const { return annotation_count_; }
  bool IsAnnotated(int id) const { return annotated_.contains(id); }

 private:
  std::map<int, NDArray> labels_;
  std::set<int> annotated_;
  size_t annotation_count_ = 0;
};

struct ActiveConfig {
  AcquisitionMethod method = AcquisitionMethod::kEpistemicMI;
  bool delete_flag = false;
  size_t q = 1;
  size_t n_iters = 40;
  TrainConfig train;
  double alpha = 1.0;
  size_t bins = kDefaultBins;
  EntropyReduction entropy = EntropyReduction::kSumParticles;
  // 0 = unlimited. Items at the cap are not offered for selection.
  size_t max_multiplicity = 0;
  size_t hist_bins = 10;
};

struct IterationRecord {
  int iter = 0;
  std::string method;
  bool delete_flag = false;
  uint64_t seed = 0;
  double val_dice = 0.0;
  std::vector<double> val_dice_per_class;
  double test_dice = 0.0;
  size_t unique_labels = 0;  // unique items the evaluated model trained on
  size_t train_size = 0;     // same, counting multiplicity
  size_t annotations = 0;    // oracle count after this iteration's query
  std::vector<size_t> uncertainty_hist;
  double wallclock_seconds = 0.0;
};

struct ScoreRow {
  int iter = 0;
  int image_id = 0;
  std::optional<double> entropy_raw, mi_raw, entropy_norm, mi_norm, score;
  bool selected = false;
};

struct VolumeRow {
  int iter = 0;
  std::string split;
  int image_id = 0;
  double dice = 0.0;
};

struct RunResult {
  std::vector<IterationRecord> records;
  std::vector<ScoreRow> scores;
  std::vector<VolumeRow> volumes;
  std::vector<double> hist_edges;
  ParticleSet final_particles;
  PoolState final_pool;
  std::string stop_reason;  // empty when all iterations ran
};

using PoolObserver =
    std::function<void(int iter, const PoolState&, const Oracle&)>;

// The active-learning loop. Each iteration trains a fresh committee on T,
// evaluates it, scores U, queries the oracle and updates the pools. The
// observer, if set, sees the pools after each update.
RunResult RunActiveLearning(const Dataset& dataset, const ActiveConfig& config,
                            uint64_t seed, const PoolObserver& observer = {});

// Builds the trainer's view of T (entries repeat duplicated ids).
TrainingSet MakeTrainingSet(const Dataset& dataset, const PoolState& pool);

std::string RecordsCsv(const std::vector<IterationRecord>& records,
                       size_t hist_bins);
std::string ScoresCsv(const std::vector<ScoreRow>& rows);
std::string VolumesCsv(const std::vector<VolumeRow>& rows);

// Shortest decimal that round-trips to the same double.
std::string FormatDouble(double v);

}  // namespace alseg

#endif  // ALSEG_POOL_H_
