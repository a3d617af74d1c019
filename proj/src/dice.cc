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

#include "alseg/dice.h"

#include <cmath>
#include <string>

#include "alseg/errors.h"

namespace alseg {

double DiceLoss(std::span<const double> y, std::span<const double> yhat,
                double eps) {
  if (y.size() != yhat.size()) {
    throw ShapeError("dice_loss: " + std::to_string(y.size()) + " vs " +
                     std::to_string(yhat.size()) + " elements");
  }
  double inter = 0.0, sy = 0.0, syh = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    inter += y[i] * yhat[i];
    sy += y[i] * y[i];
    syh += yhat[i] * yhat[i];
  }
  return 1.0 - (2.0 * inter + eps) / (sy + syh + eps);
}

double DiceLoss(const NDArray& y, const NDArray& yhat, double eps) {
  RequireSameShape(y, yhat, "dice_loss");
  return DiceLoss(y.data(), yhat.data(), eps);
}

namespace {

void CheckMasks(const NDArray& probs, const NDArray& masks) {
  if (masks.ndim() != 3 || masks.dim(0) != probs.dim(0) ||
      masks.dim(1) != probs.dim(2) || masks.dim(2) != probs.dim(3)) {
    throw ShapeError("dice: masks " + ShapeString(masks.shape()) +
                     " do not match predictions " +
                     ShapeString(probs.shape()));
  }
}

// Evaluates the likelihood and, when grad_probs is non-null, its gradient
// with respect to the probabilities.
double Likelihood(const NDArray& probs, const NDArray& masks,
                  const DiceOptions& opt, NDArray* grad_probs) {
  CheckMasks(probs, masks);
  const size_t b = probs.dim(0), nc = probs.dim(1);
  const size_t hw = probs.dim(2) * probs.dim(3);
  const size_t first = opt.include_background ? 0 : 1;
  const double weight = opt.reduction == ClassReduction::kMean
                            ? 1.0 / static_cast<double>(nc - first)
                            : 1.0;
  const double eps = opt.smoothing;
  double total = 0.0;
  for (size_t n = 0; n < b; ++n) {
    const double* label = masks.raw() + n * hw;
    for (size_t c = first; c < nc; ++c) {
      const double* p = probs.raw() + (n * nc + c) * hw;
      double inter = 0.0, sy = 0.0, syh = 0.0;
      for (size_t i = 0; i < hw; ++i) {
        const double y = label[i] == static_cast<double>(c) ? 1.0 : 0.0;
        inter += y * p[i];
        sy += y;
        syh += p[i] * p[i];
      }
      const double num = 2.0 * inter + eps;
      const double den = sy + syh + eps;
      // 1 - L written as the ratio itself: for an absent class the ratio is
      // ~1e-9 and forming 1 - (1 - ratio) would lose half the digits.
      const double arg = num / den + opt.epsilon;
      total += weight * std::log(arg);
      if (grad_probs) {
        // d/dp_i log(arg) = (1/arg) * (2 y_i den - 2 num p_i) / den^2
        const double scale = weight / (arg * den * den);
        double* g = grad_probs->raw() + (n * nc + c) * hw;
        for (size_t i = 0; i < hw; ++i) {
          const double y = label[i] == static_cast<double>(c) ? 1.0 : 0.0;
          g[i] = scale * (2.0 * y * den - 2.0 * num * p[i]);
        }
      }
    }
  }
  return total;
}

}  // namespace

double DiceLogLikelihood(const SegModel& model, const NDArray& images,
                         const NDArray& masks, const DiceOptions& options) {
  if (images.ndim() == 0 || images.dim(0) == 0) {
    throw ConfigError("dice_log_likelihood: empty batch");
  }
  return Likelihood(Forward(model, images), masks, options, nullptr);
}

ValueAndGradient DiceLogLikelihoodGradient(const SegModel& model,
                                           const NDArray& images,
                                           const NDArray& masks,
                                           const DiceOptions& options) {
  if (images.ndim() == 0 || images.dim(0) == 0) {
    throw ConfigError("dice_log_likelihood: empty batch");
  }
  const ForwardCache cache = ForwardWithCache(model, images);
  NDArray grad_probs(cache.probs.shape(), 0.0);
  ValueAndGradient out;
  out.value = Likelihood(cache.probs, masks, options, &grad_probs);
  out.gradient = Backward(model, cache, grad_probs);
  return out;
}

}  // namespace alseg
