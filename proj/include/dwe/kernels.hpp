// Copyright 2026 The DWE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense forward/backward kernels shared by the autodiff graph (double) and
// the inference-only encoder (float or double).
//
// Convolutions are stride 1 with same padding p = k / 2. They run on a
// zero-padded copy of each plane with row stride W + 2p, so every kernel tap
// is a contiguous shifted read. Output tiles for a small block of channels are
// held in registers across all input channels and taps. Outputs are produced
// in the same strided layout and cropped; columns past W are scratch.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace dwe::kernels {

struct ConvShape {
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t height;
  std::size_t width;
  std::size_t kernel;  // odd

  std::size_t pad() const { return kernel / 2; }
  std::size_t stride() const { return width + 2 * pad(); }
  std::size_t taps() const { return kernel * kernel; }
  // Largest tap offset into a padded plane.
  std::size_t reach() const { return 2 * pad() * stride() + 2 * pad(); }
};

namespace detail {

template <typename T>
inline constexpr std::size_t kTile = 256 / sizeof(T);  // elements per register tile row

inline std::size_t round_up(std::size_t n, std::size_t m) { return (n + m - 1) / m * m; }

// acc[c][t] += sum_ci sum_tap w[ci][tap][co0 + c] * src[ci][t0 + offs[tap] + t]
template <typename T, std::size_t CB>
inline void tile_accumulate(const T* src, std::size_t plane, std::size_t cin, const std::size_t* offs,
                            std::size_t taps, const T* w, std::size_t cout, std::size_t co0, std::size_t t0,
                            T (&acc)[CB][kTile<T>]) {
  constexpr std::size_t TB = kTile<T>;
  for (std::size_t ci = 0; ci < cin; ++ci) {
    const T* x0 = src + ci * plane + t0;
    const T* wrow = w + ci * taps * cout + co0;
    for (std::size_t tap = 0; tap < taps; ++tap) {
      const T* __restrict x = x0 + offs[tap];
      const T* wv = wrow + tap * cout;
      for (std::size_t c = 0; c < CB; ++c) {
        const T wc = wv[c];
#pragma omp simd
        for (std::size_t t = 0; t < TB; ++t) acc[c][t] += wc * x[t];
      }
    }
  }
}

// Correlates `cin` planes (row stride given by offs) into `cout` planes of
// length `len` (a multiple of the tile), starting from `init[co]`.
template <typename T>
void correlate(const T* src, std::size_t plane, std::size_t cin, const std::size_t* offs, std::size_t taps,
               const T* w, std::size_t cout, const T* init, T* dst, std::size_t len) {
  constexpr std::size_t TB = kTile<T>;
  auto run = [&]<std::size_t CB>(std::size_t co0) {
    for (std::size_t t0 = 0; t0 < len; t0 += TB) {
      T acc[CB][TB];
      for (std::size_t c = 0; c < CB; ++c)
        for (std::size_t t = 0; t < TB; ++t) acc[c][t] = init ? init[co0 + c] : T(0);
      tile_accumulate<T, CB>(src, plane, cin, offs, taps, w, cout, co0, t0, acc);
      for (std::size_t c = 0; c < CB; ++c) std::copy_n(acc[c], TB, dst + (co0 + c) * len + t0);
    }
  };
  for (std::size_t co = 0; co < cout;) {
    const std::size_t r = cout - co;
    const std::size_t cb = r <= 6 ? r : (r % 5 == 0 ? 5 : (r % 6 == 0 ? 6 : 4));
    switch (cb) {
      case 1: run.template operator()<1>(co); break;
      case 2: run.template operator()<2>(co); break;
      case 3: run.template operator()<3>(co); break;
      case 4: run.template operator()<4>(co); break;
      case 5: run.template operator()<5>(co); break;
      default: run.template operator()<6>(co); break;
    }
    co += cb;
  }
}

}  // namespace detail

/// out[co] = bias[co] + sum_ci sum_taps w[co][ci][ky][kx] * in[ci] shifted.
template <typename T>
void conv2d_forward(const ConvShape& s, std::span<const T> in, std::span<const T> weights, std::span<const T> bias,
                    std::span<T> out) {
  thread_local std::vector<T> padded, acc, wt;
  thread_local std::vector<std::size_t> offs;
  const std::size_t k = s.kernel, p = s.pad(), st = s.stride(), taps = s.taps();
  const std::size_t len = detail::round_up(s.height * st, detail::kTile<T>);
  const std::size_t plane = len + s.reach();
  padded.assign(s.in_channels * plane, T(0));
  for (std::size_t c = 0; c < s.in_channels; ++c)
    for (std::size_t y = 0; y < s.height; ++y)
      std::copy_n(in.data() + (c * s.height + y) * s.width, s.width, padded.data() + c * plane + (y + p) * st + p);
  offs.resize(taps);
  for (std::size_t ky = 0; ky < k; ++ky)
    for (std::size_t kx = 0; kx < k; ++kx) offs[ky * k + kx] = ky * st + kx;
  // [co][ci][tap] -> [ci][tap][co]
  wt.resize(weights.size());
  for (std::size_t co = 0; co < s.out_channels; ++co)
    for (std::size_t ci = 0; ci < s.in_channels; ++ci)
      for (std::size_t t = 0; t < taps; ++t)
        wt[(ci * taps + t) * s.out_channels + co] = weights[(co * s.in_channels + ci) * taps + t];
  acc.resize(s.out_channels * len);
  detail::correlate<T>(padded.data(), plane, s.in_channels, offs.data(), taps, wt.data(), s.out_channels,
                       bias.data(), acc.data(), len);
  for (std::size_t co = 0; co < s.out_channels; ++co)
    for (std::size_t y = 0; y < s.height; ++y)
      std::copy_n(acc.data() + co * len + y * st, s.width, out.data() + (co * s.height + y) * s.width);
}

/// Accumulates input, weight, and bias gradients. Any of the output spans may
/// be empty to skip that gradient.
template <typename T>
void conv2d_backward(const ConvShape& s, std::span<const T> in, std::span<const T> weights, std::span<const T> grad_out,
                     std::span<T> grad_in, std::span<T> grad_weights, std::span<T> grad_bias) {
  thread_local std::vector<T> padded, gext, gpad, wt;
  thread_local std::vector<std::size_t> offs;
  constexpr std::size_t TB = detail::kTile<T>;
  const std::size_t k = s.kernel, p = s.pad(), st = s.stride(), taps = s.taps(), reach = s.reach();
  const std::size_t hw = s.height * s.width;
  const std::size_t len = detail::round_up(s.height * st, TB);

  if (!grad_bias.empty())
    for (std::size_t co = 0; co < s.out_channels; ++co) {
      T sum = 0;
#pragma omp simd reduction(+ : sum)
      for (std::size_t i = 0; i < hw; ++i) sum += grad_out[co * hw + i];
      grad_bias[co] += sum;
    }

  // Output gradient in the strided layout, scratch columns zeroed, with a
  // zero margin of `reach` on both sides.
  const std::size_t in_len = detail::round_up((s.height + 2 * p) * st + 2 * p, TB);
  const std::size_t gplane = reach + std::max(len, in_len) + reach;
  gext.assign(s.out_channels * gplane, T(0));
  for (std::size_t co = 0; co < s.out_channels; ++co)
    for (std::size_t y = 0; y < s.height; ++y)
      std::copy_n(grad_out.data() + co * hw + y * s.width, s.width, gext.data() + co * gplane + reach + y * st);

  offs.resize(taps);
  if (!grad_weights.empty()) {
    const std::size_t plane = len + reach;
    padded.assign(s.in_channels * plane, T(0));
    for (std::size_t c = 0; c < s.in_channels; ++c)
      for (std::size_t y = 0; y < s.height; ++y)
        std::copy_n(in.data() + (c * s.height + y) * s.width, s.width,
                    padded.data() + c * plane + (y + p) * st + p);
    for (std::size_t ky = 0; ky < k; ++ky)
      for (std::size_t kx = 0; kx < k; ++kx) offs[ky * k + kx] = ky * st + kx;
    constexpr std::size_t VB = 64 / sizeof(T);
    auto run = [&]<std::size_t CB>(std::size_t co0) {
      for (std::size_t ci = 0; ci < s.in_channels; ++ci) {
        const T* xplane = padded.data() + ci * plane;
        for (std::size_t tap = 0; tap < taps; ++tap) {
          const T* __restrict x = xplane + offs[tap];
          T part[CB][VB] = {};
          for (std::size_t t0 = 0; t0 < len; t0 += VB)
            for (std::size_t c = 0; c < CB; ++c) {
              const T* __restrict g = gext.data() + (co0 + c) * gplane + reach + t0;
#pragma omp simd
              for (std::size_t v = 0; v < VB; ++v) part[c][v] += g[v] * x[t0 + v];
            }
          for (std::size_t c = 0; c < CB; ++c) {
            T sum = 0;
            for (std::size_t v = 0; v < VB; ++v) sum += part[c][v];
            grad_weights[((co0 + c) * s.in_channels + ci) * taps + tap] += sum;
          }
        }
      }
    };
    std::size_t co = 0;
    for (; co + 4 <= s.out_channels; co += 4) run.template operator()<4>(co);
    for (; co < s.out_channels; ++co) run.template operator()<1>(co);
  }

  if (!grad_in.empty()) {
    // d in_pad[u] = sum_co sum_tap w[co][ci][tap] * g_co[u - off_tap]; read
    // through the leading margin as g_ext[u + reach - off_tap].
    for (std::size_t ky = 0; ky < k; ++ky)
      for (std::size_t kx = 0; kx < k; ++kx) offs[ky * k + kx] = reach - (ky * st + kx);
    // [co][ci][tap] -> [co][tap][ci]
    wt.resize(weights.size());
    for (std::size_t co = 0; co < s.out_channels; ++co)
      for (std::size_t ci = 0; ci < s.in_channels; ++ci)
        for (std::size_t t = 0; t < taps; ++t)
          wt[(co * taps + t) * s.in_channels + ci] = weights[(co * s.in_channels + ci) * taps + t];
    gpad.resize(s.in_channels * in_len);
    detail::correlate<T>(gext.data(), gplane, s.out_channels, offs.data(), taps, wt.data(), s.in_channels, nullptr,
                         gpad.data(), in_len);
    for (std::size_t ci = 0; ci < s.in_channels; ++ci)
      for (std::size_t y = 0; y < s.height; ++y) {
        const T* row = gpad.data() + ci * in_len + (y + p) * st + p;
        T* dst = grad_in.data() + (ci * s.height + y) * s.width;
        for (std::size_t x = 0; x < s.width; ++x) dst[x] += row[x];
      }
  }
}

/// y = W x + b with W row-major [m, n].
template <typename T>
void dense_forward(std::size_t m, std::size_t n, std::span<const T> x, std::span<const T> w, std::span<const T> b,
                   std::span<T> y) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* __restrict row = w.data() + i * n;
    const T* __restrict xv = x.data();
    T sum = 0;
#pragma omp simd reduction(+ : sum)
    for (std::size_t j = 0; j < n; ++j) sum += row[j] * xv[j];
    y[i] = sum + b[i];
  }
}

template <typename T>
void dense_backward(std::size_t m, std::size_t n, std::span<const T> x, std::span<const T> w, std::span<const T> grad_y,
                    std::span<T> grad_x, std::span<T> grad_w, std::span<T> grad_b) {
  if (!grad_b.empty())
    for (std::size_t i = 0; i < m; ++i) grad_b[i] += grad_y[i];
  if (!grad_w.empty())
    for (std::size_t i = 0; i < m; ++i) {
      const T gi = grad_y[i];
      if (gi == T(0)) continue;
      T* __restrict row = grad_w.data() + i * n;
      const T* __restrict xv = x.data();
      for (std::size_t j = 0; j < n; ++j) row[j] += gi * xv[j];
    }
  if (!grad_x.empty())
    for (std::size_t i = 0; i < m; ++i) {
      const T gi = grad_y[i];
      if (gi == T(0)) continue;
      const T* __restrict row = w.data() + i * n;
      T* __restrict gx = grad_x.data();
      for (std::size_t j = 0; j < n; ++j) gx[j] += gi * row[j];
    }
}

template <typename T>
void relu_inplace(std::span<T> x) {
  for (auto& v : x) v = v > T(0) ? v : T(0);
}

/// Softmax over the whole span.
template <typename T>
void softmax(std::span<const T> in, std::span<T> out) {
  const T mx = *std::max_element(in.begin(), in.end());
  T total = 0;
  for (std::size_t i = 0; i < in.size(); ++i) total += (out[i] = std::exp(in[i] - mx));
  for (auto& v : out) v /= total;
}

}  // namespace dwe::kernels
