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

#ifndef ALSEG_SVGD_H_
#define ALSEG_SVGD_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alseg/dice.h"
#include "alseg/model.h"
#include "alseg/tensor.h"

namespace alseg {

// M parameter vectors of equal length P.
struct ParticleSet {
  std::vector<std::vector<double>> particles;

  size_t size() const { return particles.size(); }
  size_t dim() const { return particles.empty() ? 0 : particles[0].size(); }
  bool AllFinite() const;
};

struct KernelMatrix {
  size_t m = 0;
  double bandwidth = 1.0;
  std::vector<double> values;  // row-major m x m

  double operator()(size_t i, size_t j) const { return values[i * m + j]; }
};

enum class TrainerMode {
  kSvgd,
  kEnsemble,  // kernel fixed to identity, no repulsion
};

std::string TrainerModeName(TrainerMode mode);
TrainerMode ParseTrainerMode(const std::string& name);

// exp(-|a - b|^2 / h). Throws ConfigError for h <= 0.
double RbfKernel(std::span<const double> a, std::span<const double> b,
                 double h);

inline constexpr double kMinBandwidth = 1e-8;

// median(pairwise squared distances) / ln(M + 1), clamped to >= 1e-8.
// Returns 1.0 when there are fewer than two particles.
double MedianBandwidth(const ParticleSet& set);

KernelMatrix ComputeKernelMatrix(const ParticleSet& set, double h);

struct SvgdOptions {
  double step_size = 1e-2;
  std::optional<double> bandwidth;  // unset: median heuristic every step
  TrainerMode mode = TrainerMode::kSvgd;
};

// One update theta_k += step * phi(theta_k) with
//   phi(theta_k) = 1/M sum_j [ k(theta_j, theta_k) grad_j
//                             + grad_{theta_j} k(theta_j, theta_k) ],
// grad_j = loglik_grads[j] + prior_grads[j]. prior_grads may be empty.
// In ensemble mode phi(theta_k) = grad_k.
ParticleSet SvgdStep(const ParticleSet& set,
                     std::span<const std::vector<double>> loglik_grads,
                     std::span<const std::vector<double>> prior_grads,
                     const SvgdOptions& options);

// Runs `steps` updates against an analytic score function. Used for toy
// targets where grad log p is known in closed form.
using ScoreFn = std::function<std::vector<double>(std::span<const double>)>;
ParticleSet RunSvgd(ParticleSet set, const ScoreFn& grad_log_p, size_t steps,
                    const SvgdOptions& options);

// Training pool as seen by the trainer. `entries` indexes into images/masks
// and repeats an index once per copy, so duplicates are sampled more often.
struct TrainingSet {
  NDArray images;  // [N, 1, H, W]
  NDArray masks;   // [N, H, W]
  std::vector<size_t> entries;
};

struct TrainConfig {
  Arch arch;
  size_t steps = 300;
  size_t batch_size = 8;
  size_t particles = 5;
  double step_size = 0.5;
  TrainerMode mode = TrainerMode::kSvgd;
  std::optional<double> bandwidth;
  // Isotropic Gaussian prior precision; 0 means flat prior.
  double prior_precision = 0.0;
  DiceOptions dice = {.smoothing = kTrainingSmoothing};
};

// Trains from scratch: particle k starts from ModelInit(arch, seed + k).
// Each step draws one batch (uniform, with replacement, from entries) that
// every particle shares. Likelihood gradients are averaged over the batch.
ParticleSet TrainParticles(const TrainingSet& data, const TrainConfig& config,
                           uint64_t seed);

// Mean of particle predictions, [B, C, H, W].
NDArray EnsemblePredict(const Arch& arch, const ParticleSet& set,
                        const NDArray& images);

// One [B, C, H, W] prediction per particle.
std::vector<NDArray> ParticlePredictions(const Arch& arch,
                                         const ParticleSet& set,
                                         const NDArray& images);

// particles/<k>.tsr plus particles/manifest.json {M, P, arch, steps}.
void SaveParticles(const std::filesystem::path& dir, const ParticleSet& set,
                   const Arch& arch, size_t steps);
struct LoadedParticles {
  ParticleSet set;
  Arch arch;
  size_t steps = 0;
};
LoadedParticles LoadParticles(const std::filesystem::path& dir);

}  // namespace alseg

#endif  // ALSEG_SVGD_H_
