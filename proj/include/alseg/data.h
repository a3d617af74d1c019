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

#ifndef ALSEG_DATA_H_
#define ALSEG_DATA_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alseg/tensor.h"

namespace alseg {

// Hidden generative class of a synthetic sample. Never shown to the learner.
enum class LatentClass { kA, kB, kC };

std::string LatentName(LatentClass c);
LatentClass ParseLatent(const std::string& name);

enum class ShapeKind { kDisc, kBar };

// Integer pixel geometry. Disc: (x-cx)^2 + (y-cy)^2 <= r^2. Bar: x in
// [x0, x1), y in [y0, y1).
struct Geometry {
  ShapeKind kind = ShapeKind::kDisc;
  int cx = 0, cy = 0, r = 0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  bool Contains(int x, int y) const;
  friend bool operator==(const Geometry&, const Geometry&) = default;
};

struct Sample {
  int id = 0;
  NDArray image;  // [1, H, W], values in [0, 1], exactly float-representable
  NDArray mask;   // [H, W], class indices
  LatentClass latent = LatentClass::kA;
  Geometry geometry;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct GeneratorSpec {
  size_t height = 32;
  size_t width = 32;
  size_t classes = 3;  // background, disc, bar
  std::array<double, 3> mix = {0.45, 0.45, 0.10};
  size_t count = 105;
  double background = 0.3;
  double contrast = 0.45;
  double noise = 0.05;
  // The sparse class c: low contrast and sparse_noise_factor x noise.
  double sparse_contrast = 0.2;
  double sparse_noise_factor = 3.0;

  void Validate() const;
  friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

// a: large disc (label 1); b: bar (label 2); c: small faint noisy disc
// (label 1). Deterministic per seed.
std::vector<Sample> GenerateDataset(const GeneratorSpec& spec, uint64_t seed);

struct SplitSizes {
  size_t initial = 5;
  size_t unlabeled = 60;
  size_t validation = 20;
  size_t test = 20;

  size_t Total() const { return initial + unlabeled + validation + test; }
  friend bool operator==(const SplitSizes&, const SplitSizes&) = default;
};

// Sample ids (positions in the dataset) per split. Pairwise disjoint.
struct DatasetSplit {
  std::vector<int> initial_train;
  std::vector<int> unlabeled;
  std::vector<int> validation;
  std::vector<int> test;

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

// Shuffled disjoint assignment of ids [0, n). Throws ConfigError when the
// sizes exceed n. Left-over ids (sizes sum < n) go unused.
DatasetSplit SplitDataset(size_t n, const SplitSizes& sizes, uint64_t seed);

struct Dataset {
  GeneratorSpec spec;
  uint64_t seed = 0;
  std::vector<Sample> samples;  // index == id
  DatasetSplit split;

  const Sample& at(int id) const { return samples.at(static_cast<size_t>(id)); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Generates samples and the default split (split seed derived from seed).
Dataset MakeDataset(const GeneratorSpec& spec, const SplitSizes& sizes,
                    uint64_t seed);

// Layout: images/<id>.tsr, masks/<id>.tsr, meta.json.
void SaveDataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset LoadDataset(const std::filesystem::path& dir);

// Stacks sample images into [N, 1, H, W] and masks into [N, H, W].
NDArray StackImages(const Dataset& dataset, const std::vector<int>& ids);
NDArray StackMasks(const Dataset& dataset, const std::vector<int>& ids);

}  // namespace alseg

#endif  // ALSEG_DATA_H_
