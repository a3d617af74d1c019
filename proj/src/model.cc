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

#include "alseg/model.h"

#include <algorithm>
#include <cmath>
#include <span>

#include "alseg/errors.h"
#include "alseg/rng.h"

namespace alseg {

std::string ArchKindName(ArchKind kind) {
  return kind == ArchKind::kFlat ? "flat" : "encdec";
}

ArchKind ParseArchKind(const std::string& name) {
  if (name == "flat") return ArchKind::kFlat;
  if (name == "encdec") return ArchKind::kEncoderDecoder;
  throw ConfigError("unknown architecture '" + name +
                    "' (expected flat or encdec)");
}

void Arch::Validate() const {
  if (kernel == 0 || kernel % 2 == 0) {
    throw ConfigError("kernel size must be odd, got " +
                      std::to_string(kernel));
  }
  if (classes < 2) {
    throw ConfigError("need at least 2 classes, got " +
                      std::to_string(classes));
  }
  if (in_channels == 0 || filters == 0) {
    throw ConfigError("channel and filter counts must be positive");
  }
}

std::vector<ConvLayer> Arch::Layers() const {
  std::vector<ConvLayer> layers;
  auto add = [&](size_t in, size_t out, size_t k, bool relu) {
    const size_t offset =
        layers.empty() ? 0 : layers.back().offset + layers.back().ParamCount();
    layers.push_back({in, out, k, relu, offset});
  };
  if (kind == ArchKind::kFlat) {
    add(in_channels, filters, kernel, true);
    add(filters, filters, kernel, true);
    add(filters, classes, 1, false);
  } else {
    add(in_channels, filters, kernel, true);      // encoder, full res
    add(filters, 2 * filters, kernel, true);      // bottleneck, half res
    add(3 * filters, filters, kernel, true);      // decoder on [skip, up]
    add(filters, classes, 1, false);
  }
  return layers;
}

size_t Arch::ParamCount() const {
  size_t n = 0;
  for (const auto& l : Layers()) n += l.ParamCount();
  return n;
}

SegModel ModelInit(const Arch& arch, uint64_t seed) {
  arch.Validate();
  SegModel model{arch, std::vector<double>(arch.ParamCount(), 0.0)};
  const Rng root(seed);
  const auto layers = arch.Layers();
  for (size_t li = 0; li < layers.size(); ++li) {
    const ConvLayer& l = layers[li];
    Rng rng = root.Split("layer" + std::to_string(li));
    const double s =
        std::sqrt(1.0 / static_cast<double>(l.in_channels * l.kernel * l.kernel));
    for (size_t i = 0; i < l.WeightCount(); ++i) {
      model.params[l.offset + i] = rng.Uniform(-s, s);
    }
  }
  return model;
}

namespace {

kernels::ConvShape ShapeFor(const ConvLayer& l, size_t batch, size_t h,
                            size_t w) {
  return {batch, l.in_channels, l.out_channels, h, w, l.kernel};
}

std::span<const double> Weights(const SegModel& m, const ConvLayer& l) {
  return std::span<const double>(m.params).subspan(l.offset, l.WeightCount());
}

std::span<const double> Bias(const SegModel& m, const ConvLayer& l) {
  return std::span<const double>(m.params)
      .subspan(l.offset + l.WeightCount(), l.out_channels);
}

std::vector<double> Conv(const SegModel& m, const ConvLayer& l,
                         const std::vector<double>& in, size_t batch, size_t h,
                         size_t w) {
  const auto s = ShapeFor(l, batch, h, w);
  std::vector<double> out(s.OutputSize());
  kernels::Conv2dForward(s, in, Weights(m, l), Bias(m, l), out);
  return out;
}

std::vector<double> Relu(std::vector<double> v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
  return v;
}

void ReluBackward(const std::vector<double>& pre, std::vector<double>& grad) {
  for (size_t i = 0; i < grad.size(); ++i) {
    if (!(pre[i] > 0.0)) grad[i] = 0.0;
  }
}

// 2x2 average pool on [B, C, H, W].
std::vector<double> AvgPool(const std::vector<double>& in, size_t bc, size_t h,
                            size_t w) {
  const size_t oh = h / 2, ow = w / 2;
  std::vector<double> out(bc * oh * ow);
  for (size_t p = 0; p < bc; ++p) {
    const double* src = in.data() + p * h * w;
    double* dst = out.data() + p * oh * ow;
    for (size_t y = 0; y < oh; ++y) {
      for (size_t x = 0; x < ow; ++x) {
        dst[y * ow + x] = 0.25 * (src[2 * y * w + 2 * x] +
                                  src[2 * y * w + 2 * x + 1] +
                                  src[(2 * y + 1) * w + 2 * x] +
                                  src[(2 * y + 1) * w + 2 * x + 1]);
      }
    }
  }
  return out;
}

std::vector<double> AvgPoolBackward(const std::vector<double>& g, size_t bc,
                                    size_t h, size_t w) {
  const size_t oh = h / 2, ow = w / 2;
  std::vector<double> out(bc * h * w);
  for (size_t p = 0; p < bc; ++p) {
    const double* src = g.data() + p * oh * ow;
    double* dst = out.data() + p * h * w;
    for (size_t y = 0; y < h; ++y) {
      for (size_t x = 0; x < w; ++x) {
        dst[y * w + x] = 0.25 * src[(y / 2) * ow + x / 2];
      }
    }
  }
  return out;
}

// Nearest-neighbour 2x upsample of [B, C, H/2, W/2] into [B, C, H, W].
std::vector<double> Upsample(const std::vector<double>& in, size_t bc,
                             size_t h, size_t w) {
  const size_t ih = h / 2, iw = w / 2;
  std::vector<double> out(bc * h * w);
  for (size_t p = 0; p < bc; ++p) {
    const double* src = in.data() + p * ih * iw;
    double* dst = out.data() + p * h * w;
    for (size_t y = 0; y < h; ++y) {
      for (size_t x = 0; x < w; ++x) dst[y * w + x] = src[(y / 2) * iw + x / 2];
    }
  }
  return out;
}

std::vector<double> UpsampleBackward(const std::vector<double>& g, size_t bc,
                                     size_t h, size_t w) {
  const size_t ih = h / 2, iw = w / 2;
  std::vector<double> out(bc * ih * iw, 0.0);
  for (size_t p = 0; p < bc; ++p) {
    const double* src = g.data() + p * h * w;
    double* dst = out.data() + p * ih * iw;
    for (size_t y = 0; y < h; ++y) {
      for (size_t x = 0; x < w; ++x) dst[(y / 2) * iw + x / 2] += src[y * w + x];
    }
  }
  return out;
}

// Channel concat of [B, ca, HW] and [B, cb, HW].
std::vector<double> Concat(const std::vector<double>& a, size_t ca,
                           const std::vector<double>& b, size_t cb,
                           size_t batch, size_t hw) {
  std::vector<double> out(batch * (ca + cb) * hw);
  for (size_t n = 0; n < batch; ++n) {
    std::copy_n(a.data() + n * ca * hw, ca * hw,
                out.data() + n * (ca + cb) * hw);
    std::copy_n(b.data() + n * cb * hw, cb * hw,
                out.data() + n * (ca + cb) * hw + ca * hw);
  }
  return out;
}

void ConvBackward(const SegModel& m, const ConvLayer& l,
                  const std::vector<double>& in, const std::vector<double>& g,
                  size_t batch, size_t h, size_t w, std::vector<double>& grad,
                  std::vector<double>* grad_in) {
  const auto s = ShapeFor(l, batch, h, w);
  if (grad_in) grad_in->resize(s.InputSize());
  kernels::Conv2dBackward(
      s, in, Weights(m, l), g,
      grad_in ? std::span<double>(*grad_in) : std::span<double>(),
      std::span<double>(grad).subspan(l.offset, l.WeightCount()),
      std::span<double>(grad).subspan(l.offset + l.WeightCount(),
                                      l.out_channels));
}

}  // namespace

ForwardCache ForwardWithCache(const SegModel& model, const NDArray& batch) {
  const Arch& arch = model.arch;
  if (model.params.size() != arch.ParamCount()) {
    throw ShapeError("model has " + std::to_string(model.params.size()) +
                     " params, arch needs " +
                     std::to_string(arch.ParamCount()));
  }
  if (batch.ndim() != 4 || batch.dim(1) != arch.in_channels) {
    throw ShapeError("forward: expected [B," +
                     std::to_string(arch.in_channels) + ",H,W], got " +
                     ShapeString(batch.shape()));
  }
  ForwardCache c;
  c.batch = batch.dim(0);
  c.height = batch.dim(2);
  c.width = batch.dim(3);
  const size_t b = c.batch, h = c.height, w = c.width;
  if (h < arch.kernel || w < arch.kernel) {
    throw ShapeError("forward: spatial size smaller than kernel");
  }
  const auto layers = arch.Layers();
  std::vector<double> x(batch.data().begin(), batch.data().end());

  std::vector<double> logits;
  if (arch.kind == ArchKind::kFlat) {
    auto a1 = Conv(model, layers[0], x, b, h, w);
    auto r1 = Relu(a1);
    auto a2 = Conv(model, layers[1], r1, b, h, w);
    auto r2 = Relu(a2);
    logits = Conv(model, layers[2], r2, b, h, w);
    c.acts = {std::move(x), std::move(a1), std::move(r1), std::move(a2),
              std::move(r2)};
  } else {
    if (h % 2 || w % 2) {
      throw ShapeError("encdec forward: H and W must be even");
    }
    const size_t f = arch.filters;
    auto a1 = Conv(model, layers[0], x, b, h, w);
    auto r1 = Relu(a1);
    auto p = AvgPool(r1, b * f, h, w);
    auto a2 = Conv(model, layers[1], p, b, h / 2, w / 2);
    auto r2 = Relu(a2);
    auto u = Upsample(r2, b * 2 * f, h, w);
    auto cat = Concat(r1, f, u, 2 * f, b, h * w);
    auto a3 = Conv(model, layers[2], cat, b, h, w);
    auto r3 = Relu(a3);
    logits = Conv(model, layers[3], r3, b, h, w);
    c.acts = {std::move(x),   std::move(a1), std::move(r1),
              std::move(p),   std::move(a2), std::move(cat),
              std::move(a3),  std::move(r3)};
  }
  kernels::SoftmaxChannels(b, arch.classes, h * w, logits);
  c.probs = NDArray({b, arch.classes, h, w}, std::move(logits));
  return c;
}

NDArray Forward(const SegModel& model, const NDArray& batch) {
  return ForwardWithCache(model, batch).probs;
}

std::vector<double> Backward(const SegModel& model, const ForwardCache& c,
                             const NDArray& grad_probs) {
  RequireSameShape(c.probs, grad_probs, "backward");
  const Arch& arch = model.arch;
  const auto layers = arch.Layers();
  const size_t b = c.batch, h = c.height, w = c.width, hw = h * w;
  const size_t nc = arch.classes;

  // Softmax: dz_c = p_c (g_c - sum_k p_k g_k).
  std::vector<double> gz(c.probs.size());
  for (size_t n = 0; n < b; ++n) {
    for (size_t p = 0; p < hw; ++p) {
      double dot = 0.0;
      for (size_t k = 0; k < nc; ++k) {
        const size_t i = (n * nc + k) * hw + p;
        dot += c.probs[i] * grad_probs[i];
      }
      for (size_t k = 0; k < nc; ++k) {
        const size_t i = (n * nc + k) * hw + p;
        gz[i] = c.probs[i] * (grad_probs[i] - dot);
      }
    }
  }

  std::vector<double> grad(model.params.size(), 0.0);
  const auto& a = c.acts;
  if (arch.kind == ArchKind::kFlat) {
    std::vector<double> g2, g1;
    ConvBackward(model, layers[2], a[4], gz, b, h, w, grad, &g2);
    ReluBackward(a[3], g2);
    ConvBackward(model, layers[1], a[2], g2, b, h, w, grad, &g1);
    ReluBackward(a[1], g1);
    ConvBackward(model, layers[0], a[0], g1, b, h, w, grad, nullptr);
  } else {
    const size_t f = arch.filters;
    std::vector<double> g3, gcat, g2, gp;
    ConvBackward(model, layers[3], a[7], gz, b, h, w, grad, &g3);
    ReluBackward(a[6], g3);
    ConvBackward(model, layers[2], a[5], g3, b, h, w, grad, &gcat);
    // Split concat gradient into skip and upsampled parts.
    std::vector<double> gskip(b * f * hw), gup(b * 2 * f * hw);
    for (size_t n = 0; n < b; ++n) {
      std::copy_n(gcat.data() + n * 3 * f * hw, f * hw,
                  gskip.data() + n * f * hw);
      std::copy_n(gcat.data() + n * 3 * f * hw + f * hw, 2 * f * hw,
                  gup.data() + n * 2 * f * hw);
    }
    g2 = UpsampleBackward(gup, b * 2 * f, h, w);
    ReluBackward(a[4], g2);
    ConvBackward(model, layers[1], a[3], g2, b, h / 2, w / 2, grad, &gp);
    auto g1 = AvgPoolBackward(gp, b * f, h, w);
    for (size_t i = 0; i < g1.size(); ++i) g1[i] += gskip[i];
    ReluBackward(a[1], g1);
    ConvBackward(model, layers[0], a[0], g1, b, h, w, grad, nullptr);
  }
  return grad;
}

std::vector<bool> ReluPattern(const SegModel& model,
                              const ForwardCache& cache) {
  const std::vector<size_t> pre = model.arch.kind == ArchKind::kFlat
                                      ? std::vector<size_t>{1, 3}
                                      : std::vector<size_t>{1, 4, 6};
  std::vector<bool> out;
  for (size_t k : pre) {
    for (double v : cache.acts[k]) out.push_back(v > 0.0);
  }
  return out;
}

}  // namespace alseg
