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

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace alseg::kernels {

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using Map = Eigen::Map<RowMatrix>;

// Unfolds one [C, H, W] sample into a [C*k*k, H*W] patch matrix with zero
// padding. Row (c, ky, kx) holds the input shifted by (ky - pad, kx - pad).
void Im2Col(const ConvShape& s, const double* src, double* col) {
  const long h = static_cast<long>(s.height);
  const long w = static_cast<long>(s.width);
  const long k = static_cast<long>(s.kernel);
  const long pad = k / 2;
  const size_t hw = s.height * s.width;
  for (size_t c = 0; c < s.in_channels; ++c) {
    for (long ky = 0; ky < k; ++ky) {
      for (long kx = 0; kx < k; ++kx) {
        double* row = col + ((c * k + ky) * k + kx) * hw;
        const double* plane = src + c * hw;
        const long dy = ky - pad, dx = kx - pad;
        for (long y = 0; y < h; ++y) {
          const long iy = y + dy;
          double* out = row + y * w;
          if (iy < 0 || iy >= h) {
            std::fill(out, out + w, 0.0);
            continue;
          }
          const double* in = plane + iy * w;
          for (long x = 0; x < w; ++x) {
            const long ix = x + dx;
            out[x] = (ix >= 0 && ix < w) ? in[ix] : 0.0;
          }
        }
      }
    }
  }
}

// Adjoint of Im2Col: scatters patch-matrix gradients back onto the input.
void Col2Im(const ConvShape& s, const double* col, double* dst) {
  const long h = static_cast<long>(s.height);
  const long w = static_cast<long>(s.width);
  const long k = static_cast<long>(s.kernel);
  const long pad = k / 2;
  const size_t hw = s.height * s.width;
  std::fill(dst, dst + s.in_channels * hw, 0.0);
  for (size_t c = 0; c < s.in_channels; ++c) {
    for (long ky = 0; ky < k; ++ky) {
      for (long kx = 0; kx < k; ++kx) {
        const double* row = col + ((c * k + ky) * k + kx) * hw;
        double* plane = dst + c * hw;
        const long dy = ky - pad, dx = kx - pad;
        for (long y = 0; y < h; ++y) {
          const long iy = y + dy;
          if (iy < 0 || iy >= h) continue;
          const long x0 = std::max(0L, -dx), x1 = std::min(w, w - dx);
          double* out = plane + iy * w + dx;
          const double* in = row + y * w;
          for (long x = x0; x < x1; ++x) out[x] += in[x];
        }
      }
    }
  }
}

// Per-thread scratch for patch matrices; grows to the largest layer seen.
double* ColBuffer(size_t size) {
  thread_local std::vector<double> buffer;
  if (buffer.size() < size) buffer.resize(size);
  return buffer.data();
}

}  // namespace

void Conv2dForward(const ConvShape& s, std::span<const double> in,
                   std::span<const double> weight,
                   std::span<const double> bias, std::span<double> out) {
  const long batch = static_cast<long>(s.batch);
  const long hw = static_cast<long>(s.height * s.width);
  const long rows = static_cast<long>(s.in_channels * s.kernel * s.kernel);
  const long cout = static_cast<long>(s.out_channels);
  const ConstMap wmat(weight.data(), cout, rows);
  const Eigen::Map<const Eigen::VectorXd> bvec(bias.data(), cout);

#pragma omp parallel for schedule(static)
  for (long b = 0; b < batch; ++b) {
    const double* src = in.data() + b * s.in_channels * hw;
    Map o(out.data() + b * cout * hw, cout, hw);
    if (s.kernel == 1) {
      o.noalias() = wmat * ConstMap(src, rows, hw);
    } else {
      double* col = ColBuffer(static_cast<size_t>(rows * hw));
      Im2Col(s, src, col);
      o.noalias() = wmat * ConstMap(col, rows, hw);
    }
    o.colwise() += bvec;
  }
}

void Conv2dBackward(const ConvShape& s, std::span<const double> in,
                    std::span<const double> weight,
                    std::span<const double> grad_out,
                    std::span<double> grad_in,
                    std::span<double> grad_weight,
                    std::span<double> grad_bias) {
  const long batch = static_cast<long>(s.batch);
  const long hw = static_cast<long>(s.height * s.width);
  const long rows = static_cast<long>(s.in_channels * s.kernel * s.kernel);
  const long cout = static_cast<long>(s.out_channels);
  const size_t wsize = s.WeightSize();
  const bool want_input = !grad_in.empty();
  const ConstMap wmat(weight.data(), cout, rows);

  // Per-sample partial sums, combined below in sample order.
  std::vector<double> part_w(s.batch * wsize);
  std::vector<double> part_b(s.batch * s.out_channels);

#pragma omp parallel for schedule(static)
  for (long b = 0; b < batch; ++b) {
    const double* src = in.data() + b * s.in_channels * hw;
    const ConstMap g(grad_out.data() + b * cout * hw, cout, hw);
    Map pw(part_w.data() + b * wsize, cout, rows);
    Eigen::Map<Eigen::VectorXd>(part_b.data() + b * cout, cout) =
        g.rowwise().sum();
    if (s.kernel == 1) {
      pw.noalias() = g * ConstMap(src, rows, hw).transpose();
      if (want_input) {
        Map(grad_in.data() + b * rows * hw, rows, hw).noalias() =
            wmat.transpose() * g;
      }
    } else {
      double* col = ColBuffer(static_cast<size_t>(rows * hw));
      Im2Col(s, src, col);
      pw.noalias() = g * ConstMap(col, rows, hw).transpose();
      if (want_input) {
        Map(col, rows, hw).noalias() = wmat.transpose() * g;
        Col2Im(s, col, grad_in.data() + b * s.in_channels * hw);
      }
    }
  }

  std::fill(grad_weight.begin(), grad_weight.end(), 0.0);
  std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
  for (size_t b = 0; b < s.batch; ++b) {
    for (size_t i = 0; i < wsize; ++i) grad_weight[i] += part_w[b * wsize + i];
    for (size_t i = 0; i < s.out_channels; ++i) {
      grad_bias[i] += part_b[b * s.out_channels + i];
    }
  }
}

void SoftmaxChannels(size_t batch, size_t channels, size_t pixels,
                     std::span<double> values) {
  const long nb = static_cast<long>(batch);
#pragma omp parallel for schedule(static)
  for (long b = 0; b < nb; ++b) {
    double* base = values.data() + b * channels * pixels;
    for (size_t p = 0; p < pixels; ++p) {
      double peak = base[p];
      for (size_t c = 1; c < channels; ++c)
        peak = std::max(peak, base[c * pixels + p]);
      double norm = 0.0;
      for (size_t c = 0; c < channels; ++c) {
        const double e = std::exp(base[c * pixels + p] - peak);
        base[c * pixels + p] = e;
        norm += e;
      }
      for (size_t c = 0; c < channels; ++c) base[c * pixels + p] /= norm;
    }
  }
}

namespace reference {

void Conv2dForward(const ConvShape& s, std::span<const double> in,
                   std::span<const double> weight,
                   std::span<const double> bias, std::span<double> out) {
  const long h = static_cast<long>(s.height);
  const long w = static_cast<long>(s.width);
  const long k = static_cast<long>(s.kernel);
  const long pad = k / 2;
  for (size_t b = 0; b < s.batch; ++b) {
    for (size_t co = 0; co < s.out_channels; ++co) {
      for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
          double acc = bias[co];
          for (size_t ci = 0; ci < s.in_channels; ++ci) {
            for (long ky = 0; ky < k; ++ky) {
              for (long kx = 0; kx < k; ++kx) {
                const long iy = y + ky - pad;
                const long ix = x + kx - pad;
                if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                acc += weight[((co * s.in_channels + ci) * k + ky) * k + kx] *
                       in[((b * s.in_channels + ci) * h + iy) * w + ix];
              }
            }
          }
          out[((b * s.out_channels + co) * h + y) * w + x] = acc;
        }
      }
    }
  }
}

void Conv2dBackward(const ConvShape& s, std::span<const double> in,
                    std::span<const double> weight,
                    std::span<const double> grad_out,
                    std::span<double> grad_in,
                    std::span<double> grad_weight,
                    std::span<double> grad_bias) {
  const long h = static_cast<long>(s.height);
  const long w = static_cast<long>(s.width);
  const long k = static_cast<long>(s.kernel);
  const long pad = k / 2;
  std::fill(grad_weight.begin(), grad_weight.end(), 0.0);
  std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
  if (!grad_in.empty()) std::fill(grad_in.begin(), grad_in.end(), 0.0);
  for (size_t b = 0; b < s.batch; ++b) {
    for (size_t co = 0; co < s.out_channels; ++co) {
      for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
          const double g = grad_out[((b * s.out_channels + co) * h + y) * w + x];
          grad_bias[co] += g;
          for (size_t ci = 0; ci < s.in_channels; ++ci) {
            for (long ky = 0; ky < k; ++ky) {
              for (long kx = 0; kx < k; ++kx) {
                const long iy = y + ky - pad;
                const long ix = x + kx - pad;
                if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                const size_t wi = ((co * s.in_channels + ci) * k + ky) * k + kx;
                const size_t ii = ((b * s.in_channels + ci) * h + iy) * w + ix;
                grad_weight[wi] += g * in[ii];
                if (!grad_in.empty()) grad_in[ii] += g * weight[wi];
              }
            }
          }
        }
      }
    }
  }
}

void SoftmaxChannels(size_t batch, size_t channels, size_t pixels,
                     std::span<double> values) {
  for (size_t b = 0; b < batch; ++b) {
    for (size_t p = 0; p < pixels; ++p) {
      double peak = -INFINITY;
      for (size_t c = 0; c < channels; ++c)
        peak = std::max(peak, values[(b * channels + c) * pixels + p]);
      double norm = 0.0;
      for (size_t c = 0; c < channels; ++c) {
        double& v = values[(b * channels + c) * pixels + p];
        v = std::exp(v - peak);
        norm += v;
      }
      for (size_t c = 0; c < channels; ++c)
        values[(b * channels + c) * pixels + p] /= norm;
    }
  }
}

}  // namespace reference

}  // namespace alseg::kernels
