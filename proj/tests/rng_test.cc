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

#include "alseg/rng.h"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

namespace alseg {
namespace {

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.NextU64(), b.NextU64());
}

TEST(RngTest, KnownSplitMix64Output) {
  // First output of SplitMix64 seeded with 0.
  Rng r(0);
  EXPECT_EQ(r.NextU64(), 0xe220a8397b1dcdafULL);
}

TEST(RngTest, UniformInUnitInterval) {
  Rng r(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RngTest, BelowCoversRangeWithoutBias) {
  Rng r(9);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const uint64_t v = r.Below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  // Binomial sd is about 92; allow 5 sd.
  for (int c : counts) EXPECT_NEAR(c, n / 7, 460);
}

TEST(RngTest, NormalMoments) {
  Rng r(5);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.Normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(RngTest, SplitIgnoresParentDraws) {
  Rng a(17), b(17);
  for (int i = 0; i < 10; ++i) b.NextU64();
  Rng ca = a.Split("x"), cb = b.Split("x");
  EXPECT_EQ(ca.NextU64(), cb.NextU64());
}

TEST(RngTest, DerivedStreamsDiffer) {
  std::set<uint64_t> seen;
  for (const char* tag : {"train", "acquire", "init", "split", "batch"}) {
    seen.insert(DeriveSeed(1, tag));
  }
  EXPECT_EQ(seen.size(), 5u);
  EXPECT_NE(DeriveSeed(1, "train"), DeriveSeed(2, "train"));
  EXPECT_EQ(DeriveSeed(1, "train"), DeriveSeed(1, "train"));
}

}  // namespace
}  // namespace alseg
