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

#ifndef ALSEG_ACQUISITION_H_
#define ALSEG_ACQUISITION_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "alseg/rng.h"
#include "alseg/tensor.h"

namespace alseg {

// Committee predictions for one image: probs is [M, C, H, W].
struct PredictiveStack {
  NDArray probs;
  std::string image_id;

  size_t particles() const { return probs.dim(0); }
  size_t classes() const { return probs.dim(1); }
  size_t pixels() const { return probs.dim(2) * probs.dim(3); }

  // Throws ShapeError/ConfigError unless M >= 1, C >= 2 and every class
  // distribution sums to 1 within 1e-9.
  void Validate() const;
};

enum class EntropyReduction {
  kSumParticles,   // sum over particles of per-particle entropy
  kMeanParticles,  // rank-equivalent mean
};

struct EntropyResult {
  NDArray map;   // [H, W], per-pixel entropy
  double total;  // sum over pixels
};

// Per pixel: sum_q -sum_c p_qc ln p_qc, with 0 ln 0 = 0.
EntropyResult EntropyScore(
    const PredictiveStack& stack,
    EntropyReduction reduction = EntropyReduction::kSumParticles);

// Sum over pixels and classes of the population variance across particles.
double VarianceScore(const PredictiveStack& stack);

// Sum over pixels of H(mean_q p_q) - mean_q H(p_q).
double JsdScore(const PredictiveStack& stack);

inline constexpr size_t kDefaultBins = 32;

// Mutual information of the joint intensity histogram (natural log). Both
// images are binned over their joint [min, max] range.
double MutualInformation(std::span<const double> a, std::span<const double> b,
                         size_t bins = kDefaultBins);

// MI normalised by sqrt(H(a) H(b)); in [0, 1]. When either marginal has
// zero entropy the result is 1 for identical images and 0 otherwise.
double NormalizedMutualInformation(std::span<const double> a,
                                   std::span<const double> b,
                                   size_t bins = kDefaultBins);

struct MIMatrix {
  size_t rows = 0;  // training pool
  size_t cols = 0;  // unlabeled pool
  size_t bins = kDefaultBins;
  std::vector<double> values;

  double operator()(size_t i, size_t j) const { return values[i * cols + j]; }
};

// Entry (i, j) = MutualInformation(training[i], unlabeled[j]). Pairs are
// evaluated in parallel.
MIMatrix ComputeMIMatrix(std::span<const NDArray> training,
                         std::span<const NDArray> unlabeled,
                         size_t bins = kDefaultBins);

namespace reference {
MIMatrix ComputeMIMatrix(std::span<const NDArray> training,
                         std::span<const NDArray> unlabeled,
                         size_t bins = kDefaultBins);
}  // namespace reference

// Mean over training rows for each unlabeled column. Optional row weights
// (e.g. multiplicities) turn it into a weighted mean.
std::vector<double> MIReduce(const MIMatrix& matrix,
                             std::span<const double> row_weights = {});

// (v - min) / (max - min); a constant vector maps to all zeros.
std::vector<double> MinMaxNormalize(std::span<const double> v);

struct ScoreVector {
  std::vector<double> scores;
  std::string method;
  double alpha = 1.0;
};

// alpha * entropy - mi / alpha, elementwise. Inputs are expected to be
// min-max normalised already.
ScoreVector CombinedScore(std::span<const double> entropy,
                          std::span<const double> mi, double alpha = 1.0);

// Greedy maximum coverage restricted to the 2k most uncertain candidates.
// Coverage of candidate u is max over picks of similarity(pick, u); each
// round picks the item with largest total gain, ties going to the more
// uncertain item, then to the lower index. Returns k candidate indices.
std::vector<size_t> MaxCoverSelect(std::span<const double> uncertainty,
                                   std::span<const double> similarity,
                                   size_t k);

// Indices of the q largest scores; ties resolved by ascending index.
std::vector<size_t> SelectQueries(std::span<const double> scores, size_t q);

// q distinct indices uniformly from [0, n).
std::vector<size_t> RandomSelect(size_t n, size_t q, Rng& rng);

}  // namespace alseg

#endif  // ALSEG_ACQUISITION_H_
