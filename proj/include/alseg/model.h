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

#ifndef ALSEG_MODEL_H_
#define ALSEG_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "alseg/kernels.h"
#include "alseg/tensor.h"

namespace alseg {

enum class ArchKind {
  kFlat,        // conv k (in->f) relu, conv k (f->f) relu, conv 1x1 (f->C)
  kEncoderDecoder,  // one pooling level with a skip connection
};

std::string ArchKindName(ArchKind kind);
ArchKind ParseArchKind(const std::string& name);

struct ConvLayer {
  size_t in_channels;
  size_t out_channels;
  size_t kernel;
  bool relu;
  size_t offset;  // into the flat parameter vector; weights then bias

  size_t WeightCount() const {
    return out_channels * in_channels * kernel * kernel;
  }
  size_t ParamCount() const { return WeightCount() + out_channels; }
};

struct Arch {
  ArchKind kind = ArchKind::kFlat;
  size_t in_channels = 1;
  size_t filters = 8;
  size_t kernel = 3;
  size_t classes = 3;

  // Throws ConfigError unless kernel is odd, classes >= 2 and all counts > 0.
  void Validate() const;
  std::vector<ConvLayer> Layers() const;
  size_t ParamCount() const;

  friend bool operator==(const Arch&, const Arch&) = default;
};

struct SegModel {
  Arch arch;
  std::vector<double> params;
};

// Weights uniform in [-s, s] with s = sqrt(1 / fan_in), biases zero. Each
// layer draws from its own stream derived from `seed`.
SegModel ModelInit(const Arch& arch, uint64_t seed);

// Activations kept from a forward pass for Backward().
struct ForwardCache {
  size_t batch = 0;
  size_t height = 0;
  size_t width = 0;
  std::vector<std::vector<double>> acts;  // layer inputs and pre-activations
  NDArray probs;                          // [B, C, H, W]
};

// batch: [B, in_channels, H, W]. Returns per-pixel class probabilities.
NDArray Forward(const SegModel& model, const NDArray& batch);
ForwardCache ForwardWithCache(const SegModel& model, const NDArray& batch);

// Gradient of a scalar objective with respect to params, given the
// objective's gradient with respect to the output probabilities.
std::vector<double> Backward(const SegModel& model, const ForwardCache& cache,
                             const NDArray& grad_probs);

// Which ReLU units were active (pre-activation > 0) in a cached forward pass.
// Two parameter vectors with equal patterns lie in the same linear piece.
std::vector<bool> ReluPattern(const SegModel& model, const ForwardCache& cache);

}  // namespace alseg

#endif  // ALSEG_MODEL_H_
