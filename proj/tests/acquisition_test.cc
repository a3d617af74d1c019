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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alseg/errors.h"
#include "test_util.h"

namespace alseg {
namespace {

using V = std::vector<double>;

// Stack of M particles over a single pixel with the given class vectors.
PredictiveStack OnePixel(const std::vector<V>& per_particle) {
  const size_t m = per_particle.size(), c = per_particle[0].size();
  NDArray probs({m, c, 1, 1});
  for (size_t q = 0; q < m; ++q) {
    for (size_t k = 0; k < c; ++k) probs[q * c + k] = per_particle[q][k];
  }
  return {probs, "px"};
}

PredictiveStack RandomStack(Rng& rng, size_t m, size_t c, size_t hw) {
  NDArray probs({m, c, hw, 1});
  for (size_t q = 0; q < m; ++q) {
    for (size_t i = 0; i < hw; ++i) {
      double s = 0.0;
      for (size_t k = 0; k < c; ++k) {
        const double v = rng.Uniform() + 1e-3;
        probs[(q * c + k) * hw + i] = v;
        s += v;
      }
      for (size_t k = 0; k < c; ++k) probs[(q * c + k) * hw + i] /= s;
    }
  }
  return {probs, "r"};
}

TEST(EntropyScoreTest, UniformTwoClassesFiveParticles) {
  const auto r = EntropyScore(OnePixel(std::vector<V>(5, V{0.5, 0.5})));
  EXPECT_NEAR(r.total, 5.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(r.total, 3.465736, 1e-6);
}

TEST(EntropyScoreTest, OneHotIsZero) {
  EXPECT_EQ(EntropyScore(OnePixel({{1, 0, 0}, {0, 0, 1}})).total, 0.0);
}

TEST(EntropyScoreTest, SkewedSingleParticle) {
  EXPECT_NEAR(EntropyScore(OnePixel({{0.9, 0.1}})).total, 0.325083, 1e-6);
}

TEST(EntropyScoreTest, UniformAttainsUpperBound) {
  for (size_t m : {1, 3, 5}) {
    for (size_t c : {2, 3, 4}) {
      const auto r = EntropyScore(OnePixel(std::vector<V>(m, V(c, 1.0 / c))));
      EXPECT_NEAR(r.total, m * std::log(static_cast<double>(c)), 1e-9);
    }
  }
}

TEST(EntropyScoreTest, MapBoundedAndMeanModeIsScaled) {
  Rng rng(2);
  const auto s = RandomStack(rng, 4, 3, 30);
  const auto sum = EntropyScore(s);
  const auto mean = EntropyScore(s, EntropyReduction::kMeanParticles);
  for (size_t i = 0; i < sum.map.size(); ++i) {
    EXPECT_GE(sum.map[i], 0.0);
    EXPECT_LE(sum.map[i], 4 * std::log(3.0) + 1e-12);
  }
  EXPECT_NEAR(mean.total, sum.total / 4.0, 1e-9);
}

TEST(VarianceScoreTest, Examples) {
  EXPECT_NEAR(VarianceScore(OnePixel({{1, 0}, {0, 1}})), 0.5, 1e-15);
  EXPECT_EQ(VarianceScore(OnePixel({{0.2, 0.8}, {0.2, 0.8}})), 0.0);
  EXPECT_THROW(VarianceScore(OnePixel({{0.2, 0.8}})), ConfigError);
  EXPECT_NEAR(VarianceScore(OnePixel({{0.3, 0.7}, {0.6, 0.4}, {1, 0}})),
              VarianceScore(OnePixel({{1, 0}, {0.3, 0.7}, {0.6, 0.4}})),
              1e-15);
}

TEST(JsdScoreTest, Examples) {
  EXPECT_NEAR(JsdScore(OnePixel({{1, 0}, {0, 1}})), std::log(2.0), 1e-12);
  EXPECT_NEAR(JsdScore(OnePixel({{0.3, 0.7}, {0.3, 0.7}})), 0.0, 1e-15);
  EXPECT_THROW(JsdScore(OnePixel({{1, 0}})), ConfigError);
}

TEST(JsdScoreTest, BoundedByLogM) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const size_t m = 2 + rng.Below(4);
    const auto s = RandomStack(rng, m, 3, 1);
    const double j = JsdScore(s);
    EXPECT_GE(j, -1e-15);
    EXPECT_LE(j, std::log(static_cast<double>(m)) + 1e-12);
    EXPECT_GT(j, 0.0);  // random distributions differ
  }
}

TEST(MutualInformationTest, SelfWithTwoEvenBinsIsLogTwo) {
  const V a = {0, 0, 1, 1};
  EXPECT_NEAR(MutualInformation(a, a, 2), std::log(2.0), 1e-12);
  EXPECT_NEAR(std::log(2.0), 0.693147, 1e-6);
}

TEST(MutualInformationTest, IndependentPatternIsZero) {
  EXPECT_NEAR(MutualInformation(V{0, 0, 1, 1}, V{0, 1, 0, 1}, 2), 0.0, 1e-12);
}

TEST(MutualInformationTest, ConstantImageIsZero) {
  EXPECT_EQ(MutualInformation(V{0.4, 0.4, 0.4, 0.4}, V{0.4, 0.4, 0.4, 0.4}),
            0.0);
  EXPECT_NEAR(MutualInformation(V{0.4, 0.4, 0.4, 0.4}, V{0, 1, 0.5, 0.2}),
              0.0, 1e-12);
}

// Entropy of the marginal histogram of x over the pair's joint range, which
// for x with itself is x's own range.
double MarginalEntropy(const V& x, size_t bins) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  V counts(bins, 0.0);
  for (double v : x) {
    size_t b = static_cast<size_t>((v - *lo) / (*hi - *lo) * bins);
    counts[std::min(b, bins - 1)] += 1.0;
  }
  double h = 0.0;
  for (double c : counts) {
    if (c > 0) h -= c / x.size() * std::log(c / x.size());
  }
  return h;
}

TEST(MutualInformationTest, PropertiesOnRandomImages) {
  Rng rng(7);
  for (int t = 0; t < 30; ++t) {
    V a(64), b(64);
    for (size_t i = 0; i < 64; ++i) {
      a[i] = rng.Uniform();
      b[i] = 0.5 * a[i] + 0.5 * rng.Uniform();
    }
    const size_t bins = 2 + rng.Below(30);
    const double ab = MutualInformation(a, b, bins);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, MutualInformation(b, a, bins), 1e-12);
    EXPECT_NEAR(MutualInformation(a, a, bins), MarginalEntropy(a, bins), 1e-9);
    const double n = NormalizedMutualInformation(a, b, bins);
    EXPECT_GE(n, 0.0);
    EXPECT_LE(n, 1.0 + 1e-12);
  }
}

TEST(MIMatrixTest, SelfCaseAndTransposeAndParity) {
  Rng rng(9);
  std::vector<NDArray> t, u;
  for (int i = 0; i < 3; ++i) t.push_back(testing::RandomArray({1, 6, 6}, rng, 0, 1));
  for (int i = 0; i < 5; ++i) u.push_back(testing::RandomArray({1, 6, 6}, rng, 0, 1));
  const MIMatrix m = ComputeMIMatrix(t, u, 8);
  const MIMatrix r = reference::ComputeMIMatrix(t, u, 8);
  const MIMatrix mt = ComputeMIMatrix(u, t, 8);
  ASSERT_EQ(m.rows, 3u);
  ASSERT_EQ(m.cols, 5u);
  EXPECT_EQ(m.values, r.values);
  for (size_t i = 0; i < 3; ++i) {
    for (size_t j = 0; j < 5; ++j) {
      EXPECT_GE(m(i, j), 0.0);
      EXPECT_NEAR(m(i, j), mt(j, i), 1e-12);
    }
  }
  const MIMatrix self = ComputeMIMatrix(std::span(t).first(1),
                                        std::span(t).first(1), 8);
  EXPECT_NEAR(self(0, 0), MarginalEntropy(V(t[0].data().begin(), t[0].data().end()), 8),
              1e-9);
}

TEST(MIMatrixTest, MixedShapesAreShapeError) {
  std::vector<NDArray> t = {NDArray({1, 4, 4})}, u = {NDArray({1, 5, 5})};
  EXPECT_THROW(ComputeMIMatrix(t, u), ShapeError);
}

TEST(MIReduceTest, Examples) {
  MIMatrix m{2, 2, 32, {1.0, 5.0, 3.0, 7.0}};
  EXPECT_EQ(MIReduce(m), (V{2.0, 6.0}));
  MIMatrix one{1, 3, 32, {0.1, 0.2, 0.3}};
  EXPECT_EQ(MIReduce(one), (V{0.1, 0.2, 0.3}));
  MIMatrix zero{2, 2, 32, V(4, 0.0)};
  EXPECT_EQ(MIReduce(zero), (V{0.0, 0.0}));
  // Row weights act as multiplicities.
  EXPECT_NEAR(MIReduce(m, V{3.0, 1.0})[0], (3 * 1.0 + 3.0) / 4.0, 1e-15);
}

TEST(MinMaxNormalizeTest, Examples) {
  EXPECT_EQ(MinMaxNormalize(V{2, 4, 6}), (V{0, 0.5, 1}));
  EXPECT_EQ(MinMaxNormalize(V{3, 3, 3}), (V{0, 0, 0}));
  EXPECT_EQ(MinMaxNormalize(V{0, 0.25, 1}), (V{0, 0.25, 1}));
}

TEST(CombinedScoreTest, Examples) {
  EXPECT_EQ(CombinedScore(V{1, 0}, V{0, 1}, 1.0).scores, (V{1, -1}));
  EXPECT_EQ(CombinedScore(V{0.3, 0.8}, V{0.3, 0.8}, 1.0).scores, (V{0, 0}));
  EXPECT_NEAR(CombinedScore(V{1}, V{1}, 2.0).scores[0], 1.5, 1e-9);
  EXPECT_THROW(CombinedScore(V{1}, V{1}, 0.0), ConfigError);
  EXPECT_THROW(CombinedScore(V{1}, V{1}, -1.0), ConfigError);
}

TEST(CombinedScoreTest, NormalisedScoresInUnitRange) {
  Rng rng(3);
  V h(20), mi(20);
  for (size_t i = 0; i < 20; ++i) {
    h[i] = rng.Uniform(0, 50);
    mi[i] = rng.Uniform(0, 2);
  }
  for (double s : CombinedScore(MinMaxNormalize(h), MinMaxNormalize(mi), 1.0).scores) {
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(SelectQueriesTest, Examples) {
  EXPECT_EQ(SelectQueries(V{0.1, 0.9, 0.5}, 1), (std::vector<size_t>{1}));
  EXPECT_EQ(SelectQueries(V{0.2, 0.2, 0.2}, 2), (std::vector<size_t>{0, 1}));
  auto all = SelectQueries(V{0.3, 0.1, 0.2}, 3);
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, (std::vector<size_t>{0, 1, 2}));
  EXPECT_THROW(SelectQueries(V{1, 2}, 3), ConfigError);
}

TEST(SelectQueriesTest, ShiftInvarianceAfterNormalisation) {
  Rng rng(4);
  V h(15);
  for (double& x : h) x = rng.Uniform(0, 10);
  V shifted = h;
  for (double& x : shifted) x += 123.0;
  const V mi(15, 0.0);
  EXPECT_EQ(SelectQueries(CombinedScore(MinMaxNormalize(h), mi).scores, 3),
            SelectQueries(CombinedScore(MinMaxNormalize(shifted), mi).scores, 3));
}

double Coverage(const V& sim, size_t n, const std::vector<size_t>& picks) {
  double total = 0.0;
  for (size_t u = 0; u < n; ++u) {
    double best = 0.0;
    for (size_t p : picks) best = std::max(best, sim[p * n + u]);
    total += best;
  }
  return total;
}

double BestCoverage(const V& sim, size_t n, size_t k,
                    const std::vector<size_t>& allowed) {
  double best = 0.0;
  std::vector<bool> mask(allowed.size(), false);
  std::fill(mask.begin(), mask.begin() + static_cast<long>(k), true);
  std::sort(mask.begin(), mask.end(), std::greater<>());
  do {
    std::vector<size_t> picks;
    for (size_t i = 0; i < allowed.size(); ++i) {
      if (mask[i]) picks.push_back(allowed[i]);
    }
    best = std::max(best, Coverage(sim, n, picks));
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

TEST(MaxCoverSelectTest, ExhaustiveCase) {
  const V sim = {1, 0.2, 0.1, 0.2, 1, 0.3, 0.1, 0.3, 1};
  auto picks = MaxCoverSelect(V{0.5, 0.2, 0.9}, sim, 3);
  std::sort(picks.begin(), picks.end());
  EXPECT_EQ(picks, (std::vector<size_t>{0, 1, 2}));
}

TEST(MaxCoverSelectTest, DuplicatePairPlusDistinct) {
  // 0 and 1 are identical, 2 is distinct.
  const V sim = {1, 1, 0, 1, 1, 0, 0, 0, 1};
  const auto picks = MaxCoverSelect(V{0.9, 0.8, 0.1}, sim, 2);
  ASSERT_EQ(picks.size(), 2u);
  EXPECT_TRUE(picks[0] == 0 || picks[0] == 1);
  EXPECT_EQ(picks[1], 2u);
  EXPECT_DOUBLE_EQ(Coverage(sim, 3, picks), BestCoverage(sim, 3, 2, {0, 1, 2}));
}

TEST(MaxCoverSelectTest, IdentitySimilarityFallsBackToUncertainty) {
  const size_t n = 6;
  V sim(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) sim[i * n + i] = 1.0;
  const V unc = {0.3, 0.9, 0.1, 0.7, 0.5, 0.8};
  EXPECT_EQ(MaxCoverSelect(unc, sim, 3), SelectQueries(unc, 3));
}

TEST(MaxCoverSelectTest, MatchesBruteForceOnConstructedInstances) {
  // Two clusters {0,1,2} and {3,4} plus an outlier 5.
  const size_t n = 6;
  V sim(n * n, 0.05);
  auto set = [&](size_t i, size_t j, double v) {
    sim[i * n + j] = v;
    sim[j * n + i] = v;
  };
  for (size_t i = 0; i < n; ++i) set(i, i, 1.0);
  set(0, 1, 0.9);
  set(0, 2, 0.8);
  set(1, 2, 0.85);
  set(3, 4, 0.9);
  const V unc = {0.6, 0.9, 0.5, 0.8, 0.7, 0.4};
  for (size_t k = 1; k <= 3; ++k) {
    const auto picks = MaxCoverSelect(unc, sim, k);
    auto allowed = SelectQueries(unc, n);
    allowed.resize(std::min(n, 2 * k));
    EXPECT_NEAR(Coverage(sim, n, picks), BestCoverage(sim, n, k, allowed),
                1e-12)
        << "k=" << k;
  }
}

TEST(MaxCoverSelectTest, TooManyIsConfigError) {
  EXPECT_THROW(MaxCoverSelect(V{1, 2}, V(4, 0.0), 3), ConfigError);
}

TEST(RandomSelectTest, DistinctAndDeterministic) {
  Rng a(3), b(3);
  const auto x = RandomSelect(10, 4, a);
  EXPECT_EQ(x, RandomSelect(10, 4, b));
  std::vector<size_t> s = x;
  std::sort(s.begin(), s.end());
  EXPECT_EQ(std::unique(s.begin(), s.end()), s.end());
  for (size_t v : x) EXPECT_LT(v, 10u);
}

}  // namespace
}  // namespace alseg
