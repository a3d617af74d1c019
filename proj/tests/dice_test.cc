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

#include <gtest/gtest.h>

#include <cmath>

#include "alseg/errors.h"
#include "test_util.h"

namespace alseg {
namespace {

using V = std::vector<double>;

TEST(DiceLossTest, PerfectMatchIsZero) {
  EXPECT_NEAR(DiceLoss(V{1, 1, 0, 0}, V{1, 1, 0, 0}), 0.0, 1e-12);
}

TEST(DiceLossTest, DisjointIsOne) {
  EXPECT_NEAR(DiceLoss(V{1, 0}, V{0, 1}), 1.0, 1e-7);
}

TEST(DiceLossTest, HalfProbabilitiesGiveOneThird) {
  // 1 - 2*1 / (2 + 1)
  EXPECT_NEAR(DiceLoss(V{1, 1, 0, 0}, V{0.5, 0.5, 0.5, 0.5}), 1.0 / 3.0, 1e-7);
}

TEST(DiceLossTest, BothEmptyIsZero) {
  EXPECT_DOUBLE_EQ(DiceLoss(V{0, 0, 0}, V{0, 0, 0}), 0.0);
}

TEST(DiceLossTest, ShapeMismatchThrows) {
  EXPECT_THROW(DiceLoss(V{1, 0}, V{1, 0, 0}), ShapeError);
  EXPECT_THROW(DiceLoss(NDArray({2, 2}), NDArray({4})), ShapeError);
}

TEST(DiceLossTest, RangeAndBinarySymmetryProperties) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 1 + rng.Below(20);
    V y(n), p(n), b(n);
    for (size_t i = 0; i < n; ++i) {
      y[i] = static_cast<double>(rng.Below(2));
      b[i] = static_cast<double>(rng.Below(2));
      p[i] = rng.Uniform();
    }
    const double l = DiceLoss(y, p);
    EXPECT_GE(l, 0.0);
    EXPECT_LE(l, 1.0);
    EXPECT_DOUBLE_EQ(DiceLoss(y, b), DiceLoss(b, y));
  }
}

// One 1x1x2x2 "image" whose model output is forced by zeroed params: the
// likelihood examples are checked through the probability-level helper.
SegModel ZeroModel() {
  SegModel m = ModelInit(Arch{}, 1);
  std::fill(m.params.begin(), m.params.end(), 0.0);
  return m;
}

TEST(DiceLogLikelihoodTest, UniformPredictionValue) {
  // Zero params predict 1/3 everywhere. One 3x3 sample, class 1 fills the
  // left column, class 2 is absent.
  const SegModel m = ZeroModel();
  const NDArray x({1, 1, 3, 3});
  const NDArray y({1, 3, 3}, V{1, 0, 0, 1, 0, 0, 1, 0, 0});
  const double p = 1.0 / 3.0, e = kDiceEpsilon;
  const double d1 = (2 * 3 * p + e) / (3 + 9 * p * p + e);  // = 1/2
  const double d2 = e / (9 * p * p + e);
  const double expect = std::log(d1 + e) + std::log(d2 + e);
  EXPECT_NEAR(d1, 0.5, 1e-7);
  EXPECT_NEAR(DiceLogLikelihood(m, x, y), expect, 1e-12);
}

TEST(DiceLogLikelihoodTest, ComposedExampleMatchesLogTwoThirds) {
  // L = 1/3 gives log(2/3 + eps).
  EXPECT_NEAR(std::log(1.0 - DiceLoss(V{1, 1, 0, 0}, V{0.5, 0.5, 0.5, 0.5}) +
                       kDiceEpsilon),
              -0.405465, 1e-6);
  EXPECT_NEAR(std::log(1.0 - 0.0 + kDiceEpsilon), 0.0, 1e-6);
  EXPECT_NEAR(std::log(1.0 - 1.0 + kDiceEpsilon), std::log(kDiceEpsilon),
              1e-12);
}

TEST(DiceLogLikelihoodTest, EmptyBatchIsConfigError) {
  EXPECT_THROW(DiceLogLikelihood(ZeroModel(), NDArray({0, 1, 4, 4}),
                                 NDArray({0, 4, 4})),
               ConfigError);
}

TEST(DiceLogLikelihoodTest, ZeroMaskGradientIsFinite) {
  const SegModel m = ModelInit(Arch{}, 4);
  Rng rng(4);
  const NDArray x = testing::RandomArray({2, 1, 6, 6}, rng, 0.0, 1.0);
  const NDArray y({2, 6, 6}, 0.0);
  const auto vg = DiceLogLikelihoodGradient(m, x, y);
  EXPECT_TRUE(std::isfinite(vg.value));
  for (double g : vg.gradient) ASSERT_TRUE(std::isfinite(g));
}

TEST(DiceLogLikelihoodTest, DuplicateSampleGradientIsSumOfParts) {
  const Dataset d = testing::SmallDataset();
  const int a = d.split.initial_train[0], b = d.split.initial_train[1];
  const SegModel m = ModelInit(Arch{}, 9);
  DiceOptions opts;
  opts.smoothing = kTrainingSmoothing;
  const auto ga = DiceLogLikelihoodGradient(m, StackImages(d, {a}),
                                            StackMasks(d, {a}), opts);
  const auto gb = DiceLogLikelihoodGradient(m, StackImages(d, {b}),
                                            StackMasks(d, {b}), opts);
  const auto gab = DiceLogLikelihoodGradient(m, StackImages(d, {a, b, a}),
                                             StackMasks(d, {a, b, a}), opts);
  EXPECT_NEAR(gab.value, 2 * ga.value + gb.value, 1e-10);
  for (size_t i = 0; i < gab.gradient.size(); ++i) {
    ASSERT_NEAR(gab.gradient[i], 2 * ga.gradient[i] + gb.gradient[i],
                1e-10 * std::max(1.0, std::abs(gab.gradient[i])));
  }
}

TEST(DiceLogLikelihoodTest, MeanReductionScalesSum) {
  const Dataset d = testing::SmallDataset();
  const auto ids = d.split.initial_train;
  const SegModel m = ModelInit(Arch{}, 3);
  DiceOptions sum, mean;
  mean.reduction = ClassReduction::kMean;
  const double s =
      DiceLogLikelihood(m, StackImages(d, ids), StackMasks(d, ids), sum);
  const double a =
      DiceLogLikelihood(m, StackImages(d, ids), StackMasks(d, ids), mean);
  EXPECT_NEAR(a, s / 2.0, 1e-12);
}

}  // namespace
}  // namespace alseg
