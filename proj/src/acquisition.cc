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

#include "alseg/acquisition.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alseg/errors.h"

namespace alseg {

void PredictiveStack::Validate() const {
  if (probs.ndim() != 4) {
    throw ShapeError("predictive stack must be [M,C,H,W], got " +
                     ShapeString(probs.shape()));
  }
  if (particles() < 1 || classes() < 2) {
    throw ConfigError("predictive stack needs M >= 1 and C >= 2");
  }
  const size_t m = particles(), c = classes(), n = pixels();
  for (size_t q = 0; q < m; ++q) {
    for (size_t p = 0; p < n; ++p) {
      double s = 0.0;
      for (size_t k = 0; k < c; ++k) s += probs[(q * c + k) * n + p];
      if (std::abs(s - 1.0) > 1e-9) {
        throw ConfigError("predictive stack: class probabilities of particle " +
                          std::to_string(q) + " do not sum to 1");
      }
    }
  }
}

namespace {

inline double XLogX(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

void RequireCommittee(const PredictiveStack& stack, const char* what) {
  if (stack.probs.ndim() != 4) throw ShapeError(std::string(what) + ": bad stack");
  if (stack.particles() < 2) {
    throw ConfigError(std::string(what) + " needs at least 2 particles");
  }
}

}  // namespace

EntropyResult EntropyScore(const PredictiveStack& stack,
                           EntropyReduction reduction) {
  if (stack.probs.ndim() != 4) throw ShapeError("entropy: bad stack");
  const size_t m = stack.particles(), c = stack.classes(), n = stack.pixels();
  EntropyResult r{NDArray({stack.probs.dim(2), stack.probs.dim(3)}), 0.0};
  const double scale = reduction == EntropyReduction::kMeanParticles
                           ? 1.0 / static_cast<double>(m)
                           : 1.0;
  for (size_t p = 0; p < n; ++p) {
    double h = 0.0;
    for (size_t q = 0; q < m; ++q) {
      for (size_t k = 0; k < c; ++k) h -= XLogX(stack.probs[(q * c + k) * n + p]);
    }
    r.map[p] = h * scale;
    r.total += r.map[p];
  }
  return r;
}

double VarianceScore(const PredictiveStack& stack) {
  RequireCommittee(stack, "variance_score");
  const size_t m = stack.particles(), c = stack.classes(), n = stack.pixels();
  const double inv_m = 1.0 / static_cast<double>(m);
  double total = 0.0;
  for (size_t k = 0; k < c; ++k) {
    for (size_t p = 0; p < n; ++p) {
      double mean = 0.0;
      for (size_t q = 0; q < m; ++q) mean += stack.probs[(q * c + k) * n + p];
      mean *= inv_m;
      double var = 0.0;
      for (size_t q = 0; q < m; ++q) {
        const double d = stack.probs[(q * c + k) * n + p] - mean;
        var += d * d;
      }
      total += var * inv_m;
    }
  }
  return total;
}

double JsdScore(const PredictiveStack& stack) {
  RequireCommittee(stack, "jsd_score");
  const size_t m = stack.particles(), c = stack.classes(), n = stack.pixels();
  const double inv_m = 1.0 / static_cast<double>(m);
  double total = 0.0;
  for (size_t p = 0; p < n; ++p) {
    double h_mean = 0.0, mean_h = 0.0;
    for (size_t k = 0; k < c; ++k) {
      double mean = 0.0;
      for (size_t q = 0; q < m; ++q) {
        const double v = stack.probs[(q * c + k) * n + p];
        mean += v;
        mean_h -= XLogX(v);
      }
      h_mean -= XLogX(mean * inv_m);
    }
    // Clamp rounding noise; JSD is non-negative.
    total += std::max(0.0, h_mean - mean_h * inv_m);
  }
  return total;
}

namespace {

struct JointHistogram {
  size_t bins = 0;
  double total = 0.0;
  std::vector<double> joint;  // bins x bins
  std::vector<double> pa, pb;
  bool degenerate = false;
};

JointHistogram BuildHistogram(std::span<const double> a,
                              std::span<const double> b, size_t bins) {
  if (a.size() != b.size()) {
    throw ShapeError("mutual_information: pixel counts differ (" +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
  if (bins < 2) throw ConfigError("mutual_information: need bins >= 2");
  if (a.empty()) throw ShapeError("mutual_information: empty images");
  JointHistogram hist;
  hist.bins = bins;
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const double lo = std::min(*amin, *bmin);
  const double hi = std::max(*amax, *bmax);
  if (!(hi > lo)) {
    hist.degenerate = true;
    return hist;
  }
  const double scale = static_cast<double>(bins) / (hi - lo);
  auto bin_of = [&](double v) {
    const auto i = static_cast<size_t>((v - lo) * scale);
    return std::min(i, bins - 1);
  };
  hist.joint.assign(bins * bins, 0.0);
  hist.pa.assign(bins, 0.0);
  hist.pb.assign(bins, 0.0);
  for (size_t i = 0; i < a.size(); ++i) {
    const size_t ia = bin_of(a[i]), ib = bin_of(b[i]);
    hist.joint[ia * bins + ib] += 1.0;
    hist.pa[ia] += 1.0;
    hist.pb[ib] += 1.0;
  }
  hist.total = static_cast<double>(a.size());
  return hist;
}

double HistMI(const JointHistogram& h) {
  if (h.degenerate) return 0.0;
  const double n = h.total;
  double mi = 0.0;
  for (size_t i = 0; i < h.bins; ++i) {
    if (h.pa[i] == 0.0) continue;
    for (size_t j = 0; j < h.bins; ++j) {
      const double c = h.joint[i * h.bins + j];
      if (c == 0.0) continue;
      mi += (c / n) * std::log(c * n / (h.pa[i] * h.pb[j]));
    }
  }
  return std::max(0.0, mi);
}

double MarginalEntropy(const std::vector<double>& counts, double n) {
  double e = 0.0;
  for (double c : counts) e -= XLogX(c / n);
  return e;
}

}  // namespace

double MutualInformation(std::span<const double> a, std::span<const double> b,
                         size_t bins) {
  return HistMI(BuildHistogram(a, b, bins));
}

double NormalizedMutualInformation(std::span<const double> a,
                                   std::span<const double> b, size_t bins) {
  const JointHistogram h = BuildHistogram(a, b, bins);
  const bool same = std::equal(a.begin(), a.end(), b.begin(), b.end());
  if (h.degenerate) return same ? 1.0 : 0.0;
  const double ha = MarginalEntropy(h.pa, h.total);
  const double hb = MarginalEntropy(h.pb, h.total);
  if (ha <= 0.0 || hb <= 0.0) return same ? 1.0 : 0.0;
  if (same) return 1.0;
  return std::clamp(HistMI(h) / std::sqrt(ha * hb), 0.0, 1.0);
}

namespace {

void CheckPools(std::span<const NDArray> training,
                std::span<const NDArray> unlabeled) {
  if (training.empty() || unlabeled.empty()) {
    throw ConfigError("mi_matrix: both pools must be nonempty");
  }
  const auto& shape = training[0].shape();
  for (const auto& x : training) {
    if (x.shape() != shape) throw ShapeError("mi_matrix: mixed image shapes");
  }
  for (const auto& x : unlabeled) {
    if (x.shape() != shape) throw ShapeError("mi_matrix: mixed image shapes");
  }
}

}  // namespace

MIMatrix ComputeMIMatrix(std::span<const NDArray> training,
                         std::span<const NDArray> unlabeled, size_t bins) {
  CheckPools(training, unlabeled);
  MIMatrix mat{training.size(), unlabeled.size(), bins,
               std::vector<double>(training.size() * unlabeled.size())};
  const long total = static_cast<long>(mat.values.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long idx = 0; idx < total; ++idx) {
    const size_t i = static_cast<size_t>(idx) / mat.cols;
    const size_t j = static_cast<size_t>(idx) % mat.cols;
    mat.values[idx] =
        MutualInformation(training[i].data(), unlabeled[j].data(), bins);
  }
  return mat;
}

namespace reference {

MIMatrix ComputeMIMatrix(std::span<const NDArray> training,
                         std::span<const NDArray> unlabeled, size_t bins) {
  CheckPools(training, unlabeled);
  MIMatrix mat{training.size(), unlabeled.size(), bins, {}};
  for (const auto& t : training) {
    for (const auto& u : unlabeled) {
      mat.values.push_back(MutualInformation(t.data(), u.data(), bins));
    }
  }
  return mat;
}

}  // namespace reference

std::vector<double> MIReduce(const MIMatrix& matrix,
                             std::span<const double> row_weights) {
  if (!row_weights.empty() && row_weights.size() != matrix.rows) {
    throw ShapeError("mi_reduce: need one weight per training row");
  }
  std::vector<double> out(matrix.cols, 0.0);
  double wsum = 0.0;
  for (size_t i = 0; i < matrix.rows; ++i) {
    const double w = row_weights.empty() ? 1.0 : row_weights[i];
    wsum += w;
    for (size_t j = 0; j < matrix.cols; ++j) out[j] += w * matrix(i, j);
  }
  if (wsum > 0.0) {
    for (double& v : out) v /= wsum;
  }
  return out;
}

std::vector<double> MinMaxNormalize(std::span<const double> v) {
  if (v.empty()) throw ConfigError("minmax_normalize: empty vector");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double range = *hi - *lo;
  std::vector<double> out(v.size(), 0.0);
  if (!(range > 0.0)) return out;
  for (size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / range;
  return out;
}

ScoreVector CombinedScore(std::span<const double> entropy,
                          std::span<const double> mi, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("combined_score: alpha must be > 0");
  if (entropy.size() != mi.size()) {
    throw ShapeError("combined_score: entropy and MI lengths differ");
  }
  ScoreVector out{std::vector<double>(entropy.size()), "epistemic+mi", alpha};
  for (size_t j = 0; j < entropy.size(); ++j) {
    out.scores[j] = alpha * entropy[j] - mi[j] / alpha;
  }
  return out;
}

std::vector<size_t> SelectQueries(std::span<const double> scores, size_t q) {
  if (q < 1 || q > scores.size()) {
    throw ConfigError("select_queries: q=" + std::to_string(q) +
                      " outside [1, " + std::to_string(scores.size()) + "]");
  }
  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  idx.resize(q);
  return idx;
}

std::vector<size_t> MaxCoverSelect(std::span<const double> uncertainty,
                                   std::span<const double> similarity,
                                   size_t k) {
  const size_t n = uncertainty.size();
  if (k > n) {
    throw ConfigError("max_cover_select: k=" + std::to_string(k) +
                      " exceeds candidate count " + std::to_string(n));
  }
  if (similarity.size() != n * n) {
    throw ShapeError("max_cover_select: similarity must be n x n");
  }
  // Uncertainty order doubles as the tie-break order.
  std::vector<size_t> pool = SelectQueries(uncertainty, n);
  pool.resize(std::min(n, 2 * k));

  std::vector<double> cover(n, 0.0);
  std::vector<bool> taken(n, false);
  std::vector<size_t> picks;
  for (size_t round = 0; round < k; ++round) {
    double best_gain = -1.0;
    size_t best = n;
    for (size_t c : pool) {
      if (taken[c]) continue;
      double gain = 0.0;
      for (size_t u = 0; u < n; ++u) {
        gain += std::max(0.0, similarity[c * n + u] - cover[u]);
      }
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    taken[best] = true;
    picks.push_back(best);
    for (size_t u = 0; u < n; ++u) {
      cover[u] = std::max(cover[u], similarity[best * n + u]);
    }
  }
  return picks;
}

std::vector<size_t> RandomSelect(size_t n, size_t q, Rng& rng) {
  if (q > n) {
    throw ConfigError("random_select: q exceeds pool size");
  }
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates.
  for (size_t i = 0; i < q; ++i) {
    const size_t j = i + rng.Below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(q);
  return idx;
}

}  // namespace alseg
