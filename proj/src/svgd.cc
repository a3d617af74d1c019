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

#include "alseg/svgd.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "alseg/errors.h"
#include "alseg/rng.h"
#include "json.hpp"

namespace alseg {

bool ParticleSet::AllFinite() const {
  for (const auto& p : particles) {
    for (double v : p) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::string TrainerModeName(TrainerMode mode) {
  return mode == TrainerMode::kSvgd ? "svgd" : "ensemble";
}

TrainerMode ParseTrainerMode(const std::string& name) {
  if (name == "svgd") return TrainerMode::kSvgd;
  if (name == "ensemble") return TrainerMode::kEnsemble;
  throw ConfigError("unknown trainer mode '" + name +
                    "' (expected svgd or ensemble)");
}

namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

}  // namespace

double RbfKernel(std::span<const double> a, std::span<const double> b,
                 double h) {
  if (!(h > 0.0)) throw ConfigError("rbf bandwidth must be positive");
  if (a.size() != b.size()) throw ShapeError("rbf: vector lengths differ");
  return std::exp(-SquaredDistance(a, b) / h);
}

double MedianBandwidth(const ParticleSet& set) {
  const size_t m = set.size();
  if (m < 2) return 1.0;
  std::vector<double> d;
  d.reserve(m * (m - 1) / 2);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = i + 1; j < m; ++j) {
      d.push_back(SquaredDistance(set.particles[i], set.particles[j]));
    }
  }
  std::sort(d.begin(), d.end());
  const size_t n = d.size();
  const double med = n % 2 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
  return std::max(med / std::log(static_cast<double>(m) + 1.0),
                  kMinBandwidth);
}

KernelMatrix ComputeKernelMatrix(const ParticleSet& set, double h) {
  KernelMatrix k;
  k.m = set.size();
  k.bandwidth = h;
  k.values.assign(k.m * k.m, 1.0);
  for (size_t i = 0; i < k.m; ++i) {
    for (size_t j = i + 1; j < k.m; ++j) {
      const double v = RbfKernel(set.particles[i], set.particles[j], h);
      k.values[i * k.m + j] = v;
      k.values[j * k.m + i] = v;
    }
  }
  return k;
}

ParticleSet SvgdStep(const ParticleSet& set,
                     std::span<const std::vector<double>> loglik_grads,
                     std::span<const std::vector<double>> prior_grads,
                     const SvgdOptions& options) {
  const size_t m = set.size();
  const size_t p = set.dim();
  if (m == 0) throw ConfigError("svgd_step: empty particle set");
  if (loglik_grads.size() != m ||
      (!prior_grads.empty() && prior_grads.size() != m)) {
    throw ShapeError("svgd_step: need one gradient per particle");
  }
  std::vector<std::vector<double>> grads(m);
  for (size_t j = 0; j < m; ++j) {
    if (loglik_grads[j].size() != p ||
        (!prior_grads.empty() && prior_grads[j].size() != p)) {
      throw ShapeError("svgd_step: gradient length mismatch at particle " +
                       std::to_string(j));
    }
    grads[j] = loglik_grads[j];
    if (!prior_grads.empty()) {
      for (size_t i = 0; i < p; ++i) grads[j][i] += prior_grads[j][i];
    }
    for (double v : grads[j]) {
      if (!std::isfinite(v)) {
        throw NumericalError("svgd_step: non-finite gradient for particle " +
                             std::to_string(j));
      }
    }
  }

  ParticleSet next = set;
  const double eps = options.step_size;
  if (options.mode == TrainerMode::kEnsemble) {
    for (size_t k = 0; k < m; ++k) {
      for (size_t i = 0; i < p; ++i) next.particles[k][i] += eps * grads[k][i];
    }
  } else {
    const double h = options.bandwidth ? *options.bandwidth
                                       : MedianBandwidth(set);
    const KernelMatrix kmat = ComputeKernelMatrix(set, h);
    const double inv_m = 1.0 / static_cast<double>(m);
    std::vector<double> phi(p);
    for (size_t k = 0; k < m; ++k) {
      std::fill(phi.begin(), phi.end(), 0.0);
      const auto& tk = set.particles[k];
      for (size_t j = 0; j < m; ++j) {
        const double kv = kmat(j, k);
        const auto& tj = set.particles[j];
        // grad_{theta_j} exp(-|tj - tk|^2 / h) = -(2/h)(tj - tk) k(tj, tk)
        const double rep = -2.0 / h * kv;
        for (size_t i = 0; i < p; ++i) {
          phi[i] += kv * grads[j][i] + rep * (tj[i] - tk[i]);
        }
      }
      for (size_t i = 0; i < p; ++i) {
        next.particles[k][i] += eps * (phi[i] * inv_m);
      }
    }
  }
  for (size_t k = 0; k < m; ++k) {
    for (double v : next.particles[k]) {
      if (!std::isfinite(v)) {
        throw NumericalError("svgd_step: particle " + std::to_string(k) +
                             " became non-finite");
      }
    }
  }
  return next;
}

ParticleSet RunSvgd(ParticleSet set, const ScoreFn& grad_log_p, size_t steps,
                    const SvgdOptions& options) {
  std::vector<std::vector<double>> grads(set.size());
  for (size_t s = 0; s < steps; ++s) {
    for (size_t k = 0; k < set.size(); ++k) {
      grads[k] = grad_log_p(set.particles[k]);
    }
    set = SvgdStep(set, grads, {}, options);
  }
  return set;
}

ParticleSet TrainParticles(const TrainingSet& data, const TrainConfig& config,
                           uint64_t seed) {
  if (data.entries.empty()) {
    throw ConfigError("train_particles: training pool is empty");
  }
  if (config.particles == 0 || config.batch_size == 0) {
    throw ConfigError("train_particles: particles and batch size must be > 0");
  }
  config.arch.Validate();
  const size_t h = data.images.dim(2), w = data.images.dim(3);
  const size_t hw = h * w;

  ParticleSet set;
  for (size_t k = 0; k < config.particles; ++k) {
    set.particles.push_back(ModelInit(config.arch, seed + k).params);
  }
  Rng batch_rng(DeriveSeed(seed, "batch"));
  const SvgdOptions opts{config.step_size, config.bandwidth, config.mode};
  const double inv_b = 1.0 / static_cast<double>(config.batch_size);

  NDArray images({config.batch_size, 1, h, w});
  NDArray masks({config.batch_size, h, w});
  std::vector<std::vector<double>> lik(config.particles);
  std::vector<std::vector<double>> prior;
  SegModel model{config.arch, {}};
  for (size_t step = 0; step < config.steps; ++step) {
    for (size_t b = 0; b < config.batch_size; ++b) {
      const size_t idx = data.entries[batch_rng.Below(data.entries.size())];
      std::copy_n(data.images.raw() + idx * hw, hw, images.raw() + b * hw);
      std::copy_n(data.masks.raw() + idx * hw, hw, masks.raw() + b * hw);
    }
    for (size_t k = 0; k < config.particles; ++k) {
      model.params = set.particles[k];
      auto vg = DiceLogLikelihoodGradient(model, images, masks, config.dice);
      for (double& g : vg.gradient) g *= inv_b;
      lik[k] = std::move(vg.gradient);
    }
    if (config.prior_precision > 0.0) {
      prior.resize(config.particles);
      for (size_t k = 0; k < config.particles; ++k) {
        prior[k] = set.particles[k];
        for (double& v : prior[k]) v *= -config.prior_precision;
      }
    }
    set = SvgdStep(set, lik, prior, opts);
  }
  return set;
}

std::vector<NDArray> ParticlePredictions(const Arch& arch,
                                         const ParticleSet& set,
                                         const NDArray& images) {
  std::vector<NDArray> out;
  out.reserve(set.size());
  for (const auto& theta : set.particles) {
    out.push_back(Forward(SegModel{arch, theta}, images));
  }
  return out;
}

NDArray EnsemblePredict(const Arch& arch, const ParticleSet& set,
                        const NDArray& images) {
  auto preds = ParticlePredictions(arch, set, images);
  NDArray mean = preds.at(0);
  for (size_t k = 1; k < preds.size(); ++k) {
    for (size_t i = 0; i < mean.size(); ++i) mean[i] += preds[k][i];
  }
  const double inv = 1.0 / static_cast<double>(preds.size());
  for (size_t i = 0; i < mean.size(); ++i) mean[i] *= inv;
  return mean;
}

void SaveParticles(const std::filesystem::path& dir, const ParticleSet& set,
                   const Arch& arch, size_t steps) {
  std::filesystem::create_directories(dir);
  for (size_t k = 0; k < set.size(); ++k) {
    WriteTsr(dir / (std::to_string(k) + ".tsr"),
             NDArray({set.dim()}, set.particles[k]));
  }
  nlohmann::ordered_json manifest = {
      {"M", set.size()},
      {"P", set.dim()},
      {"arch",
       {{"kind", ArchKindName(arch.kind)},
        {"in_channels", arch.in_channels},
        {"filters", arch.filters},
        {"kernel", arch.kernel},
        {"classes", arch.classes}}},
      {"steps", steps}};
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
}

LoadedParticles LoadParticles(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw FormatError((dir / "manifest.json").string() + ": missing");
  LoadedParticles out;
  try {
    const auto j = nlohmann::json::parse(in);
    const auto& a = j.at("arch");
    out.arch.kind = ParseArchKind(a.at("kind").get<std::string>());
    out.arch.in_channels = a.at("in_channels").get<size_t>();
    out.arch.filters = a.at("filters").get<size_t>();
    out.arch.kernel = a.at("kernel").get<size_t>();
    out.arch.classes = a.at("classes").get<size_t>();
    out.steps = j.at("steps").get<size_t>();
    const size_t m = j.at("M").get<size_t>();
    const size_t p = j.at("P").get<size_t>();
    for (size_t k = 0; k < m; ++k) {
      const NDArray t = ReadTsr(dir / (std::to_string(k) + ".tsr"));
      if (t.size() != p) {
        throw FormatError("particle " + std::to_string(k) + " has " +
                          std::to_string(t.size()) + " values, expected " +
                          std::to_string(p));
      }
      out.set.particles.emplace_back(t.data().begin(), t.data().end());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError((dir / "manifest.json").string() + ": " + e.what());
  }
  return out;
}

}  // namespace alseg
