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

#include "alseg/report.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "alseg/errors.h"
#include "alseg/metrics.h"
#include "json.hpp"

namespace alseg {

namespace {

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw FormatError("cannot write " + path.string());
}

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::vector<std::string>> ParseCsv(const std::string& text,
                                               std::vector<std::string>* header) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw FormatError("csv: missing header");
  *header = SplitLine(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto row = SplitLine(line);
    if (row.size() != header->size()) {
      throw FormatError("csv: row has " + std::to_string(row.size()) +
                        " cells, header has " +
                        std::to_string(header->size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
T ParseNumber(const std::string& s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("csv: bad number '" + s + "'");
  }
  return v;
}

size_t Column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw FormatError("csv: missing column " + name);
  return static_cast<size_t>(it - header.begin());
}

std::vector<size_t> PrefixedColumns(const std::vector<std::string>& header,
                                    const std::string& prefix) {
  std::vector<size_t> cols;
  for (size_t i = 0;; ++i) {
    const auto it = std::find(header.begin(), header.end(),
                              prefix + std::to_string(i));
    if (it == header.end()) break;
    cols.push_back(static_cast<size_t>(it - header.begin()));
  }
  return cols;
}

using VariantKey = std::pair<int, int>;  // method, 0 = delete / 1 = nodelete

VariantKey KeyOf(const MethodSpec& s) {
  return {static_cast<int>(s.method), s.delete_flag ? 0 : 1};
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for fewer than two values.
double Stdev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string VariantLabel(const MethodSpec& s) {
  return MethodName(s.method) + " " + DeleteTag(s.delete_flag);
}

struct Group {
  MethodSpec spec;
  std::vector<const RunData*> runs;  // sorted by seed
};

std::vector<Group> GroupRuns(const std::vector<RunData>& runs) {
  std::map<VariantKey, Group> groups;
  for (const RunData& r : runs) {
    Group& g = groups[KeyOf(r.spec)];
    g.spec = r.spec;
    g.runs.push_back(&r);
  }
  std::vector<Group> out;
  for (auto& [key, g] : groups) {
    std::sort(g.runs.begin(), g.runs.end(),
              [](const RunData* a, const RunData* b) { return a->seed < b->seed; });
    out.push_back(std::move(g));
  }
  return out;
}

size_t CommonIterations(const Group& g) {
  size_t n = g.runs.front()->records.size();
  for (const RunData* r : g.runs) n = std::min(n, r->records.size());
  return n;
}

// Per-volume test Dice of one run at one iteration, keyed by image id.
std::map<int, double> TestDice(const RunData& run, int iter) {
  std::map<int, double> out;
  for (const VolumeRow& v : run.volumes) {
    if (v.iter == iter && v.split == "test") out[v.image_id] = v.dice;
  }
  return out;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Num(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

}  // namespace

std::vector<IterationRecord> ParseRecordsCsv(const std::string& text) {
  std::vector<std::string> h;
  const auto rows = ParseCsv(text, &h);
  const size_t c_iter = Column(h, "iter"), c_method = Column(h, "method"),
               c_delete = Column(h, "delete"), c_seed = Column(h, "seed"),
               c_val = Column(h, "val_dice"), c_test = Column(h, "test_dice"),
               c_unique = Column(h, "unique_labels"),
               c_size = Column(h, "train_size"),
               c_ann = Column(h, "annotations");
  const auto c_class = PrefixedColumns(h, "val_dice_class");
  const auto c_hist = PrefixedColumns(h, "hist");
  std::vector<IterationRecord> out;
  for (const auto& row : rows) {
    IterationRecord r;
    r.iter = ParseNumber<int>(row[c_iter]);
    r.method = row[c_method];
    r.delete_flag = ParseNumber<int>(row[c_delete]) != 0;
    r.seed = ParseNumber<uint64_t>(row[c_seed]);
    r.val_dice = ParseNumber<double>(row[c_val]);
    for (size_t c : c_class) r.val_dice_per_class.push_back(ParseNumber<double>(row[c]));
    r.test_dice = ParseNumber<double>(row[c_test]);
    r.unique_labels = ParseNumber<size_t>(row[c_unique]);
    r.train_size = ParseNumber<size_t>(row[c_size]);
    r.annotations = ParseNumber<size_t>(row[c_ann]);
    for (size_t c : c_hist) r.uncertainty_hist.push_back(ParseNumber<size_t>(row[c]));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<VolumeRow> ParseVolumesCsv(const std::string& text) {
  std::vector<std::string> h;
  const auto rows = ParseCsv(text, &h);
  const size_t c_iter = Column(h, "iter"), c_split = Column(h, "split"),
               c_id = Column(h, "image_id"), c_dice = Column(h, "dice");
  std::vector<VolumeRow> out;
  for (const auto& row : rows) {
    out.push_back({ParseNumber<int>(row[c_iter]), row[c_split],
                   ParseNumber<int>(row[c_id]),
                   ParseNumber<double>(row[c_dice])});
  }
  return out;
}

RunData LoadRunDir(const std::filesystem::path& dir) {
  RunData run;
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(ReadText(dir / "manifest.json"));
    run.spec.method = ParseMethod(m.at("method").get<std::string>());
    run.spec.delete_flag = m.at("delete").get<bool>();
    run.seed = m.at("seed").get<uint64_t>();
    run.total_available = m.at("total_available").get<size_t>();
    run.hist_edges = m.at("hist_edges").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError((dir / "manifest.json").string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError((dir / "manifest.json").string() + ": " + e.what());
  }
  try {
    run.records = ParseRecordsCsv(ReadText(dir / "records.csv"));
    run.volumes = ParseVolumesCsv(ReadText(dir / "volumes.csv"));
  } catch (const FormatError& e) {
    throw FormatError(dir.string() + ": " + e.what());
  }
  return run;
}

Report BuildReport(const std::vector<RunData>& runs) {
  if (runs.empty()) throw ConfigError("report: no completed runs");
  const auto groups = GroupRuns(runs);
  Report report;
  for (const Group& g : groups) {
    VariantSummary s;
    s.spec = g.spec;
    s.seed_count = g.runs.size();
    const size_t n = CommonIterations(g);
    if (n == 0) {
      throw ConfigError("report: run " + VariantLabel(g.spec) +
                        " has no iterations");
    }
    size_t best = 0;
    double best_val = -1.0;
    for (size_t t = 0; t < n; ++t) {
      std::vector<double> v;
      for (const RunData* r : g.runs) v.push_back(r->records[t].val_dice);
      const double m = Mean(v);
      if (m > best_val) {
        best_val = m;
        best = t;
      }
    }
    std::vector<double> val, test, pct;
    for (const RunData* r : g.runs) {
      const IterationRecord& rec = r->records[best];
      val.push_back(rec.val_dice);
      test.push_back(rec.test_dice);
      pct.push_back(r->total_available == 0
                        ? 0.0
                        : 100.0 * static_cast<double>(rec.unique_labels) /
                              static_cast<double>(r->total_available));
    }
    s.best_iter = g.runs.front()->records[best].iter;
    s.val_dice_mean = Mean(val);
    s.val_dice_std = Stdev(val);
    s.test_dice_mean = Mean(test);
    s.test_dice_std = Stdev(test);
    s.pct_data = Mean(pct);
    report.summary.push_back(s);
  }

  for (size_t i = 0; i < groups.size(); ++i) {
    for (size_t j = i + 1; j < groups.size(); ++j) {
      WilcoxonRow row;
      row.a = groups[i].spec;
      row.b = groups[j].spec;
      std::vector<double> a, b;
      for (const RunData* ra : groups[i].runs) {
        for (const RunData* rb : groups[j].runs) {
          if (ra->seed != rb->seed) continue;
          const auto da = TestDice(*ra, report.summary[i].best_iter);
          const auto db = TestDice(*rb, report.summary[j].best_iter);
          for (const auto& [id, d] : da) {
            const auto it = db.find(id);
            if (it == db.end()) continue;
            a.push_back(d);
            b.push_back(it->second);
          }
        }
      }
      if (a.empty()) {  // no seed in common
        report.wilcoxon.push_back(row);
        continue;
      }
      try {
        const WilcoxonResult w = WilcoxonSignedRank(a, b);
        row.statistic = w.statistic;
        row.p_value = w.p_value;
      } catch (const InsufficientDataError&) {
      }
      report.wilcoxon.push_back(row);
    }
  }
  return report;
}

std::string SummaryCsv(const Report& report) {
  std::ostringstream os;
  os << "method,delete,seed_count,best_iter,val_dice_mean,val_dice_std,"
        "test_dice_mean,test_dice_std,pct_data\n";
  for (const VariantSummary& s : report.summary) {
    os << MethodName(s.spec.method) << "," << (s.spec.delete_flag ? 1 : 0)
       << "," << s.seed_count << "," << s.best_iter << ","
       << FormatDouble(s.val_dice_mean) << "," << FormatDouble(s.val_dice_std)
       << "," << FormatDouble(s.test_dice_mean) << ","
       << FormatDouble(s.test_dice_std) << "," << FormatDouble(s.pct_data)
       << "\n";
  }
  return os.str();
}

std::string WilcoxonCsv(const Report& report) {
  std::ostringstream os;
  os << "method_a,method_b,statistic,p\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? FormatDouble(*v) : std::string("NA");
  };
  for (const WilcoxonRow& w : report.wilcoxon) {
    os << MethodName(w.a.method) << "/" << DeleteTag(w.a.delete_flag) << ","
       << MethodName(w.b.method) << "/" << DeleteTag(w.b.delete_flag) << ","
       << opt(w.statistic) << "," << opt(w.p_value) << "\n";
  }
  return os.str();
}

std::string CurvesCsv(const std::vector<RunData>& runs) {
  std::ostringstream os;
  os << "method,delete,seed,iter,val_dice,unique_labels\n";
  for (const Group& g : GroupRuns(runs)) {
    for (const RunData* r : g.runs) {
      for (const IterationRecord& rec : r->records) {
        os << MethodName(g.spec.method) << "," << (g.spec.delete_flag ? 1 : 0)
           << "," << r->seed << "," << rec.iter << ","
           << FormatDouble(rec.val_dice) << "," << rec.unique_labels << "\n";
      }
    }
  }
  return os.str();
}

std::string SummaryTable(const Report& report) {
  std::ostringstream os;
  os << std::left << std::setw(24) << "variant" << std::right << std::setw(6)
     << "seeds" << std::setw(6) << "best" << std::setw(16) << "val dice"
     << std::setw(16) << "test dice" << std::setw(9) << "% data" << "\n";
  os << std::fixed << std::setprecision(4);
  for (const VariantSummary& s : report.summary) {
    std::ostringstream val, test;
    val << std::fixed << std::setprecision(4) << s.val_dice_mean << "+-"
        << s.val_dice_std;
    test << std::fixed << std::setprecision(4) << s.test_dice_mean << "+-"
         << s.test_dice_std;
    os << std::left << std::setw(24) << VariantLabel(s.spec) << std::right
       << std::setw(6) << s.seed_count << std::setw(6) << s.best_iter
       << std::setw(16) << val.str() << std::setw(16) << test.str()
       << std::setw(9) << std::setprecision(2) << s.pct_data
       << std::setprecision(4) << "\n";
  }
  return os.str();
}

std::string LineChartSvg(const std::string& title, const std::string& x_label,
                         const std::string& y_label,
                         const std::vector<Series>& series) {
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                   "#bcbd22", "#17becf", "#393b79", "#637939"};
  const double width = 720, height = 420;
  const double left = 60, right = 200, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const Series& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x0 = x1 = s.x[i];
        y0 = y1 = s.y[i];
        first = false;
      }
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" font-family=\"sans-serif\" "
     << "font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
     << "font-size=\"14\">" << Escape(title) << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw
     << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    os << "<text x=\"" << px(fx) << "\" y=\"" << top + ph + 16
       << "\" text-anchor=\"middle\">" << Num(fx) << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << py(fy) + 4
       << "\" text-anchor=\"end\">" << Num(fy) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\">" << Escape(x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << top + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << Escape(y_label)
     << "</text>\n";
  for (size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      os << (i ? " " : "") << px(s.x[i]) << "," << py(s.y[i]);
    }
    os << "\"/>\n";
    const double ly = top + 10 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\""
       << left + pw + 32 << "\" y2=\"" << ly << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\">"
       << Escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

Report EmitReport(const std::vector<RunData>& runs,
                  const std::filesystem::path& out_dir, bool svg) {
  Report report = BuildReport(runs);
  std::filesystem::create_directories(out_dir);
  WriteText(out_dir / "summary.csv", SummaryCsv(report));
  WriteText(out_dir / "curves.csv", CurvesCsv(runs));
  WriteText(out_dir / "wilcoxon.csv", WilcoxonCsv(report));
  if (!svg) return report;

  const auto groups = GroupRuns(runs);
  std::vector<Series> dice, unique;
  size_t longest = 0;
  for (const Group& g : groups) {
    const size_t n = CommonIterations(g);
    longest = std::max(longest, n);
    Series d{VariantLabel(g.spec), {}, {}}, u{VariantLabel(g.spec), {}, {}};
    for (size_t t = 0; t < n; ++t) {
      std::vector<double> v, c;
      for (const RunData* r : g.runs) {
        v.push_back(r->records[t].val_dice);
        c.push_back(static_cast<double>(r->records[t].unique_labels));
      }
      const double iter = g.runs.front()->records[t].iter;
      d.x.push_back(iter);
      d.y.push_back(Mean(v));
      u.x.push_back(iter);
      u.y.push_back(Mean(c));
    }
    dice.push_back(std::move(d));
    unique.push_back(std::move(u));
  }
  WriteText(out_dir / "dice_vs_iter.svg",
            LineChartSvg("Validation Dice (seed mean)", "active iteration",
                         "mean Dice", dice));
  WriteText(out_dir / "unique_vs_iter.svg",
            LineChartSvg("Unique labelled images (seed mean)",
                         "active iteration", "unique labels", unique));

  // Training-pool uncertainty at the first, middle and last iteration.
  std::vector<size_t> picks = {0, (longest - 1) / 2, longest - 1};
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  for (size_t t : picks) {
    std::vector<Series> hist;
    int iter_label = static_cast<int>(t) + 1;
    for (const Group& g : groups) {
      if (t >= CommonIterations(g)) continue;
      const auto& edges = g.runs.front()->hist_edges;
      const size_t bins = g.runs.front()->records[t].uncertainty_hist.size();
      if (edges.size() != bins + 1) continue;
      std::vector<double> counts(bins, 0.0);
      for (const RunData* r : g.runs) {
        const auto& h = r->records[t].uncertainty_hist;
        for (size_t b = 0; b < bins && b < h.size(); ++b) {
          counts[b] += static_cast<double>(h[b]);
        }
      }
      double total = 0.0;
      for (double c : counts) total += c;
      Series s{VariantLabel(g.spec), {}, {}};
      for (size_t b = 0; b < bins; ++b) {
        s.x.push_back(0.5 * (edges[b] + edges[b + 1]));
        s.y.push_back(total > 0 ? counts[b] / total : 0.0);
      }
      iter_label = g.runs.front()->records[t].iter;
      hist.push_back(std::move(s));
    }
    if (hist.empty()) continue;
    WriteText(out_dir / ("uncertainty_hist_iter" + std::to_string(iter_label) +
                         ".svg"),
              LineChartSvg("Training-pool pixel entropy, iteration " +
                               std::to_string(iter_label),
                           "committee entropy (nats)", "fraction of pixels",
                           hist));
  }
  return report;
}

}  // namespace alseg
