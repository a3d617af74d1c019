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

#ifndef ALSEG_KERNELS_H_
#define ALSEG_KERNELS_H_

#include <cstddef>
#include <span>

namespace alseg::kernels {

// Zero-padded "same" 2-D convolution over a [batch, channels, H, W] buffer.
// Weights are laid out [out][in][k][k]; bias is [out].
struct ConvShape {
  size_t batch = 1;
  size_t in_channels = 1;
  size_t out_channels = 1;
  size_t height = 1;
  size_t width = 1;
  size_t kernel = 1;

  size_t InputSize() const { return batch * in_channels * height * width; }
  size_t OutputSize() const { return batch * out_channels * height * width; }
  size_t WeightSize() const {
    return out_channels * in_channels * kernel * kernel;
  }
};

// Kernels used by the model: samples are processed in parallel (OpenMP),
// each as an im2col patch matrix times the weight matrix. Results do not
// depend on the thread count; batch reductions are combined in sample order.
void Conv2dForward(const ConvShape& s, std::span<const double> in,
                   std::span<const double> weight,
                   std::span<const double> bias, std::span<double> out);

// Overwrites grad_weight and grad_bias with sums over the batch. grad_in may
// be empty, in which case the input gradient is skipped.
void Conv2dBackward(const ConvShape& s, std::span<const double> in,
                    std::span<const double> weight,
                    std::span<const double> grad_out,
                    std::span<double> grad_in,
                    std::span<double> grad_weight,
                    std::span<double> grad_bias);

// Softmax over the channel axis of [batch, C, H*W] logits, in place.
void SoftmaxChannels(size_t batch, size_t channels, size_t pixels,
                     std::span<double> values);

// Straightforward single-threaded versions. Kept as the oracle for the
// parallel kernels and as the baseline in bench/.
namespace reference {

void Conv2dForward(const ConvShape& s, std::span<const double> in,
                   std::span<const double> weight,
                   std::span<const double> bias, std::span<double> out);

void Conv2dBackward(const ConvShape& s, std::span<const double> in,
                    std::span<const double> weight,
                    std::span<const double> grad_out,
                    std::span<double> grad_in,
                    std::span<double> grad_weight,
                    std::span<double> grad_bias);

void SoftmaxChannels(size_t batch, size_t channels, size_t pixels,
                     std::span<double> values);

}  // namespace reference

}  // namespace alseg::kernels

#endif  // ALSEG_KERNELS_H_
