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

#include "alseg/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "alseg/acquisition.h"
#include "alseg/errors.h"

namespace alseg {

double Dsc(const NDArray& pred_labels, const NDArray& truth, int class_id) {
  RequireSameShape(pred_labels, truth, "dsc");
  const double c = class_id;
  size_t a = 0, b = 0, both = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    const bool in_a = pred_labels[i] == c;
    const bool in_b = truth[i] == c;
    a += in_a;
    b += in_b;
    both += in_a && in_b;
  }
  if (a + b == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

namespace {

// Two-sided p of W+ under the sign-flip null, conditional on the observed
// (average) ranks. Doubled ranks are integers, so the null distribution is a
// subset-sum count.
double ExactSignedRankP(const std::vector<double>& rank, double w_plus) {
  std::vector<size_t> r2(rank.size());
  size_t total = 0;
  for (size_t i = 0; i < rank.size(); ++i) {
    r2[i] = static_cast<size_t>(std::lround(2.0 * rank[i]));
    total += r2[i];
  }
  std::vector<double> ways(total + 1, 0.0);
  ways[0] = 1.0;
  for (size_t v : r2) {
    for (size_t s = total; s >= v; --s) ways[s] += ways[s - v];
  }
  const long long obs = std::llround(2.0 * w_plus);
  const long long dev = std::llabs(2 * obs - static_cast<long long>(total));
  double extreme = 0.0, all = 0.0;
  for (size_t s = 0; s <= total; ++s) {
    all += ways[s];
    if (std::llabs(2 * static_cast<long long>(s) -
                   static_cast<long long>(total)) >= dev) {
      extreme += ways[s];
    }
  }
  return std::min(1.0, extreme / all);
}

}  // namespace

WilcoxonResult WilcoxonSignedRank(std::span<const double> a,
                                  std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("wilcoxon: unequal lengths");
  std::vector<double> d;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  }
  if (d.empty()) return {0.0, 1.0, 0};
  if (d.size() < 5) {
    throw InsufficientDataError("wilcoxon: only " + std::to_string(d.size()) +
                                " non-zero differences (need 5)");
  }
  const size_t n = d.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
    return std::abs(d[i]) < std::abs(d[j]);
  });
  std::vector<double> rank(n);
  double tie_term = 0.0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  double w_plus = 0.0, w_minus = 0.0;
  for (size_t i = 0; i < n; ++i) (d[i] > 0 ? w_plus : w_minus) += rank[i];
  WilcoxonResult r;
  r.n = n;
  r.statistic = std::min(w_plus, w_minus);
  if (n <= kWilcoxonExactMaxN) {
    r.p_value = ExactSignedRankP(rank, w_plus);
    return r;
  }
  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  if (var <= 0.0) return r;
  const double dev = std::max(0.0, std::abs(w_plus - mean) - 0.5);
  const double z = dev / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

std::vector<double> UniformEdges(double lo, double hi, size_t bins) {
  if (!(hi > lo) || bins == 0) throw ConfigError("histogram: bad edge range");
  std::vector<double> edges(bins + 1);
  for (size_t i = 0; i <= bins; ++i) {
    edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  }
  return edges;
}

UncertaintyHistogram BinValues(std::span<const double> values,
                               std::span<const double> edges) {
  if (edges.size() < 2) throw ConfigError("histogram: need >= 2 edges");
  for (size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw ConfigError("histogram: edges must be strictly increasing");
    }
  }
  UncertaintyHistogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.counts.assign(edges.size() - 1, 0);
  for (double v : values) {
    // Bin i holds [edges[i], edges[i+1]); the last bin is closed.
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    size_t bin = it == edges.begin() ? 0 : static_cast<size_t>(it - edges.begin()) - 1;
    bin = std::min(bin, h.counts.size() - 1);
    ++h.counts[bin];
  }
  return h;
}

UncertaintyHistogram PoolUncertaintyHistogram(const Arch& arch,
                                              const ParticleSet& set,
                                              const NDArray& images,
                                              std::span<const double> edges) {
  if (images.ndim() != 4 || images.dim(0) == 0) {
    throw ConfigError("pool histogram: training pool is empty");
  }
  const auto preds = ParticlePredictions(arch, set, images);
  const size_t n = images.dim(0), c = arch.classes;
  const size_t h = images.dim(2), w = images.dim(3), hw = h * w;
  std::vector<double> values;
  values.reserve(n * hw);
  for (size_t i = 0; i < n; ++i) {
    PredictiveStack stack{NDArray({set.size(), c, h, w}), {}};
    for (size_t q = 0; q < set.size(); ++q) {
      std::copy_n(preds[q].raw() + i * c * hw, c * hw,
                  stack.probs.raw() + q * c * hw);
    }
    const auto e = EntropyScore(stack);
    values.insert(values.end(), e.map.data().begin(), e.map.data().end());
  }
  return BinValues(values, edges);
}

NDArray ArgmaxLabels(const NDArray& probs) {
  const size_t b = probs.dim(0), c = probs.dim(1);
  const size_t hw = probs.dim(2) * probs.dim(3);
  NDArray out({b, probs.dim(2), probs.dim(3)});
  for (size_t n = 0; n < b; ++n) {
    for (size_t p = 0; p < hw; ++p) {
      size_t best = 0;
      for (size_t k = 1; k < c; ++k) {
        if (probs[(n * c + k) * hw + p] > probs[(n * c + best) * hw + p]) best = k;
      }
      out[n * hw + p] = static_cast<double>(best);
    }
  }
  return out;
}

DiceReport EvaluateSegmentation(const Arch& arch, const ParticleSet& set,
                                const NDArray& images, const NDArray& masks,
                                int first_class) {
  const NDArray labels = ArgmaxLabels(EnsemblePredict(arch, set, images));
  const size_t b = images.dim(0), h = images.dim(2), w = images.dim(3);
  const int nc = static_cast<int>(arch.classes);
  DiceReport r;
  r.per_class_mean.assign(static_cast<size_t>(nc - first_class), 0.0);
  for (size_t n = 0; n < b; ++n) {
    NDArray pred({h, w}), truth({h, w});
    std::copy_n(labels.raw() + n * h * w, h * w, pred.raw());
    std::copy_n(masks.raw() + n * h * w, h * w, truth.raw());
    std::vector<double> row;
    double sum = 0.0;
    for (int c = first_class; c < nc; ++c) {
      const double v = Dsc(pred, truth, c);
      row.push_back(v);
      r.per_class_mean[static_cast<size_t>(c - first_class)] += v;
      sum += v;
    }
    r.volume_mean.push_back(sum / static_cast<double>(row.size()));
    r.per_volume.push_back(std::move(row));
  }
  if (b == 0) return r;
  const double nb = static_cast<double>(b);
  for (double& v : r.per_class_mean) v /= nb;
  r.mean = std::accumulate(r.volume_mean.begin(), r.volume_mean.end(), 0.0) / nb;
  double var = 0.0;
  for (double v : r.volume_mean) var += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(var / nb);
  return r;
}

}  // namespace alseg
