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

#include "alseg/kernels.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_util.h"

namespace alseg::kernels {
namespace {

std::vector<double> RandomVec(size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.Uniform(-1.0, 1.0);
  return v;
}

void ExpectClose(const std::vector<double>& a, const std::vector<double>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    // Summation order differs between the two paths.
    ASSERT_NEAR(a[i], b[i], 1e-12 * std::max(1.0, std::abs(b[i]))) << i;
  }
}

class ConvParity : public ::testing::TestWithParam<ConvShape> {};

TEST_P(ConvParity, ForwardMatchesReference) {
  const ConvShape s = GetParam();
  Rng rng(s.batch * 131 + s.kernel);
  const auto in = RandomVec(s.InputSize(), rng);
  const auto w = RandomVec(s.WeightSize(), rng);
  const auto b = RandomVec(s.out_channels, rng);
  std::vector<double> fast(s.OutputSize()), ref(s.OutputSize());
  Conv2dForward(s, in, w, b, fast);
  reference::Conv2dForward(s, in, w, b, ref);
  ExpectClose(fast, ref);
}

TEST_P(ConvParity, BackwardMatchesReference) {
  const ConvShape s = GetParam();
  Rng rng(s.batch * 71 + s.in_channels);
  const auto in = RandomVec(s.InputSize(), rng);
  const auto w = RandomVec(s.WeightSize(), rng);
  const auto g = RandomVec(s.OutputSize(), rng);
  std::vector<double> gi(s.InputSize(), 7.0), gw(s.WeightSize(), 7.0),
      gb(s.out_channels, 7.0);
  std::vector<double> ri(s.InputSize()), rw(s.WeightSize()),
      rb(s.out_channels);
  Conv2dBackward(s, in, w, g, gi, gw, gb);
  reference::Conv2dBackward(s, in, w, g, ri, rw, rb);
  ExpectClose(gi, ri);
  ExpectClose(gw, rw);
  ExpectClose(gb, rb);
}

INSTANTIATE_TEST_SUITE_P(
    Shapes, ConvParity,
    ::testing::Values(ConvShape{1, 1, 1, 5, 5, 3}, ConvShape{3, 2, 4, 7, 6, 3},
                      ConvShape{2, 3, 2, 9, 9, 5}, ConvShape{4, 8, 3, 6, 6, 1},
                      ConvShape{2, 4, 4, 3, 3, 3}, ConvShape{5, 1, 8, 16, 16, 3}));

TEST(ConvTest, SkippingInputGradientLeavesWeightsUnchanged) {
  const ConvShape s{2, 3, 2, 6, 6, 3};
  Rng rng(4);
  const auto in = RandomVec(s.InputSize(), rng);
  const auto w = RandomVec(s.WeightSize(), rng);
  const auto g = RandomVec(s.OutputSize(), rng);
  std::vector<double> gi(s.InputSize()), gw(s.WeightSize()), gb(2);
  std::vector<double> gw2(s.WeightSize()), gb2(2);
  Conv2dBackward(s, in, w, g, gi, gw, gb);
  Conv2dBackward(s, in, w, g, {}, gw2, gb2);
  EXPECT_EQ(gw, gw2);
  EXPECT_EQ(gb, gb2);
}

TEST(ConvTest, IdentityKernelCopiesInput) {
  const ConvShape s{1, 1, 1, 4, 4, 3};
  std::vector<double> w(9, 0.0);
  w[4] = 1.0;
  Rng rng(2);
  const auto in = RandomVec(16, rng);
  std::vector<double> out(16);
  Conv2dForward(s, in, w, std::vector<double>{0.0}, out);
  for (size_t i = 0; i < 16; ++i) EXPECT_DOUBLE_EQ(out[i], in[i]);
}

TEST(ConvTest, RepeatedCallsAreBitIdentical) {
  const ConvShape s{4, 3, 5, 8, 8, 3};
  Rng rng(8);
  const auto in = RandomVec(s.InputSize(), rng);
  const auto w = RandomVec(s.WeightSize(), rng);
  const auto g = RandomVec(s.OutputSize(), rng);
  std::vector<double> a(s.WeightSize()), b(s.WeightSize()), ab(5), bb(5);
  Conv2dBackward(s, in, w, g, {}, a, ab);
  Conv2dBackward(s, in, w, g, {}, b, bb);
  EXPECT_EQ(a, b);
}

TEST(SoftmaxTest, MatchesReferenceAndNormalises) {
  Rng rng(6);
  auto v = RandomVec(2 * 3 * 10, rng);
  for (double& x : v) x *= 30.0;
  auto r = v;
  SoftmaxChannels(2, 3, 10, v);
  reference::SoftmaxChannels(2, 3, 10, r);
  ExpectClose(v, r);
  for (size_t n = 0; n < 2; ++n) {
    for (size_t p = 0; p < 10; ++p) {
      double s = 0.0;
      for (size_t c = 0; c < 3; ++c) s += v[(n * 3 + c) * 10 + p];
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

}  // namespace
}  // namespace alseg::kernels
