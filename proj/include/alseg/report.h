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

#ifndef ALSEG_REPORT_H_
#define ALSEG_REPORT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "alseg/config.h"
#include "alseg/pool.h"

namespace alseg {

// Everything the report needs from one finished run.
struct RunData {
  MethodSpec spec;
  uint64_t seed = 0;
  size_t total_available = 0;  // |T0| + |U0|
  std::vector<double> hist_edges;
  std::vector<IterationRecord> records;
  std::vector<VolumeRow> volumes;
};

// Inverses of RecordsCsv / VolumesCsv. Throw FormatError on malformed input.
std::vector<IterationRecord> ParseRecordsCsv(const std::string& text);
std::vector<VolumeRow> ParseVolumesCsv(const std::string& text);

// Reads manifest.json, records.csv and volumes.csv from a run directory.
RunData LoadRunDir(const std::filesystem::path& dir);

struct VariantSummary {
  MethodSpec spec;
  size_t seed_count = 0;
  int best_iter = 0;
  double val_dice_mean = 0.0;
  double val_dice_std = 0.0;
  double test_dice_mean = 0.0;
  double test_dice_std = 0.0;
  double pct_data = 0.0;
};

struct WilcoxonRow {
  MethodSpec a, b;
  // Empty when there are too few non-zero paired differences.
  std::optional<double> statistic, p_value;
};

struct Report {
  std::vector<VariantSummary> summary;
  std::vector<WilcoxonRow> wilcoxon;
};

// Groups runs by (method, delete). The best iteration maximises the
// seed-mean validation Dice, earliest on ties; % data is the seed mean of
// 100 * unique labels / total available at that iteration. Wilcoxon pairs
// per-volume test Dice at each variant's best iteration, matched by seed and
// image id. Throws ConfigError when runs is empty.
Report BuildReport(const std::vector<RunData>& runs);

std::string SummaryCsv(const Report& report);
std::string WilcoxonCsv(const Report& report);
std::string CurvesCsv(const std::vector<RunData>& runs);
// Fixed-width table for terminals.
std::string SummaryTable(const Report& report);

struct Series {
  std::string name;
  std::vector<double> x, y;
};
std::string LineChartSvg(const std::string& title, const std::string& x_label,
                         const std::string& y_label,
                         const std::vector<Series>& series);

// Writes summary.csv, curves.csv, wilcoxon.csv and, when svg is set,
// dice_vs_iter.svg, unique_vs_iter.svg and uncertainty_hist_iter<t>.svg.
Report EmitReport(const std::vector<RunData>& runs,
                  const std::filesystem::path& out_dir, bool svg);

}  // namespace alseg

#endif  // ALSEG_REPORT_H_
