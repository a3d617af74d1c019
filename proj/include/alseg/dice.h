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

#ifndef ALSEG_DICE_H_
#define ALSEG_DICE_H_

#include <span>
#include <vector>

#include "alseg/model.h"
#include "alseg/tensor.h"

namespace alseg {

inline constexpr double kDiceEpsilon = 1e-7;
// Ratio smoothing used for training. With a tiny value the log-Dice of a class
// absent from a sample is unbounded below and drives every particle to an
// all-background prediction.
inline constexpr double kTrainingSmoothing = 1.0;

enum class ClassReduction { kSum, kMean };

struct DiceOptions {
  // Floor inside the logarithm.
  double epsilon = kDiceEpsilon;
  // Added to the numerator and denominator of the Dice ratio.
  double smoothing = kDiceEpsilon;
  bool include_background = false;
  // How per-class terms of one sample are combined.
  ClassReduction reduction = ClassReduction::kSum;
};

// Soft Dice loss with squared-sum denominator, smoothed by eps:
//   1 - (2 sum y*yhat + eps) / (sum y^2 + sum yhat^2 + eps)
double DiceLoss(std::span<const double> y, std::span<const double> yhat,
                double eps = kDiceEpsilon);
double DiceLoss(const NDArray& y, const NDArray& yhat,
                double eps = kDiceEpsilon);

// Sum over samples (and over foreground classes, or their mean) of
// log(1 - DiceLoss + eps). images: [B,1,H,W]; masks: [B,H,W] class indices.
double DiceLogLikelihood(const SegModel& model, const NDArray& images,
                         const NDArray& masks,
                         const DiceOptions& options = {});

struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

// Analytic gradient of DiceLogLikelihood with respect to model.params.
ValueAndGradient DiceLogLikelihoodGradient(const SegModel& model,
                                           const NDArray& images,
                                           const NDArray& masks,
                                           const DiceOptions& options = {});

}  // namespace alseg

#endif  // ALSEG_DICE_H_
