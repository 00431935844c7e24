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

#include "dwe/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dwe/error.hpp"

namespace dwe {
namespace {

constexpr double kSignThreshold = 1e-12;

void orient(std::vector<double>& v) {
  for (double x : v)
    if (std::abs(x) > kSignThreshold) {
      if (x < 0)
        for (double& y : v) y = -y;
      return;
    }
}

EmbeddingVec add_scaled(const EmbeddingVec& base, double t, std::span<const double> dir) {
  EmbeddingVec out = base;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += t * dir[i];
  return out;
}

}  // namespace

BarycenterWeights BarycenterWeights::uniform(std::size_t n) {
  if (n == 0) fail(ErrorKind::WeightError, "uniform weights need at least one input");
  return BarycenterWeights{std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

void BarycenterWeights::validate(std::size_t count) const {
  if (alphas.size() != count || count == 0)
    fail(ErrorKind::WeightError, "expected " + std::to_string(count) + " weights, got " + std::to_string(alphas.size()));
  double sum = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) fail(ErrorKind::WeightError, "weights must be finite and nonnegative");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail(ErrorKind::WeightError, "weights must sum to 1");
}

EmbeddingVec weighted_embedding(std::span<const EmbeddingVec> embeddings, const BarycenterWeights& w) {
  w.validate(embeddings.size());
  const std::size_t p = embeddings[0].values.size();
  for (const auto& e : embeddings)
    if (e.values.size() != p) fail(ErrorKind::ShapeMismatch, "embeddings differ in dimension");
  std::vector<std::size_t> order(embeddings.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (w.alphas[a] != w.alphas[b]) return w.alphas[a] < w.alphas[b];
    return embeddings[a].values < embeddings[b].values;
  });
  EmbeddingVec out{std::vector<double>(p, 0.0)};
  for (std::size_t k : order) {
    const double a = w.alphas[k];
    if (a == 0.0) continue;
    for (std::size_t i = 0; i < p; ++i) out.values[i] += a * embeddings[k].values[i];
  }
  return out;
}

Histogram barycenter(const NetworkParams& params, std::span<const Histogram> hists, const BarycenterWeights& w) {
  w.validate(hists.size());
  std::vector<EmbeddingVec> e;
  e.reserve(hists.size());
  for (const auto& h : hists) e.push_back(embed(params, h));
  return decode(params, weighted_embedding(e, w));
}

std::vector<Histogram> interpolate(const NetworkParams& params, const Histogram& a, const Histogram& b,
                                   std::size_t steps) {
  if (steps < 2) fail(ErrorKind::InvalidArgument, "interpolation needs at least 2 steps");
  const EmbeddingVec ea = embed(params, a), eb = embed(params, b);
  std::vector<Histogram> frames;
  frames.reserve(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(steps - 1);
    EmbeddingVec e{std::vector<double>(ea.values.size())};
    // std::lerp is exact at both ends and constant when the endpoints agree.
    for (std::size_t i = 0; i < e.values.size(); ++i) e.values[i] = std::lerp(ea.values[i], eb.values[i], t);
    frames.push_back(decode(params, e));
  }
  return frames;
}

SymmetricEigen jacobi_eigen(std::span<const double> matrix, std::size_t n) {
  if (matrix.size() != n * n) fail(ErrorKind::ShapeMismatch, "matrix is not n x n");
  std::vector<double> a(matrix.begin(), matrix.end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto A = [&](std::size_t r, std::size_t c) -> double& { return a[r * n + c]; };

  double scale = 0.0;
  for (double x : a) scale += x * x;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    if (off <= 1e-32 * scale || off == 0.0) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return A(x, x) > A(y, y); });
  SymmetricEigen out;
  for (std::size_t k : order) {
    out.values.push_back(A(k, k));
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v[i * n + k];
    orient(col);
    out.vectors.push_back(std::move(col));
  }
  return out;
}

std::vector<double> embedding_covariance(std::span<const EmbeddingVec> embeddings, const EmbeddingVec& mean) {
  const std::size_t p = mean.values.size();
  std::vector<double> cov(p * p, 0.0);
  std::vector<double> d(p);
  for (const auto& e : embeddings) {
    if (e.values.size() != p) fail(ErrorKind::ShapeMismatch, "embeddings differ in dimension");
    for (std::size_t i = 0; i < p; ++i) d[i] = e.values[i] - mean.values[i];
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i; j < p; ++j) cov[i * p + j] += d[i] * d[j];
  }
  const auto n = static_cast<double>(embeddings.size());
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) cov[j * p + i] = cov[i * p + j] /= n;
  return cov;
}

PrincipalDirections principal_directions(std::span<const EmbeddingVec> embeddings, std::size_t k) {
  if (embeddings.empty()) fail(ErrorKind::InsufficientSamples, "no embeddings");
  const std::size_t p = embeddings[0].values.size();
  if (k == 0 || k > p) fail(ErrorKind::InvalidArgument, "k must lie in [1, " + std::to_string(p) + "]");
  if (embeddings.size() < k + 1)
    fail(ErrorKind::InsufficientSamples,
         "need at least " + std::to_string(k + 1) + " samples, got " + std::to_string(embeddings.size()));
  PrincipalDirections pd;
  pd.mean.values.assign(p, 0.0);
  for (const auto& e : embeddings) {
    if (e.values.size() != p) fail(ErrorKind::ShapeMismatch, "embeddings differ in dimension");
    for (std::size_t i = 0; i < p; ++i) pd.mean.values[i] += e.values[i];
  }
  for (double& m : pd.mean.values) m /= static_cast<double>(embeddings.size());
  const SymmetricEigen eig = jacobi_eigen(embedding_covariance(embeddings, pd.mean), p);
  for (std::size_t c = 0; c < k; ++c) {
    pd.variances.push_back(std::max(0.0, eig.values[c]));
    pd.directions.push_back(eig.vectors[c]);
  }
  return pd;
}

PrincipalDirections pga(const NetworkParams& params, std::span<const Histogram> hists, std::size_t k) {
  std::vector<EmbeddingVec> e;
  e.reserve(hists.size());
  for (const auto& h : hists) e.push_back(embed(params, h));
  return principal_directions(e, k);
}

std::vector<Histogram> pga_walk(const NetworkParams& params, const PrincipalDirections& pd, std::size_t component,
                                std::span<const double> t_values) {
  if (component >= pd.directions.size())
    fail(ErrorKind::IndexError, "component " + std::to_string(component) + " of " +
                                    std::to_string(pd.directions.size()));
  const double sd = std::sqrt(pd.variances[component]);
  std::vector<Histogram> frames;
  frames.reserve(t_values.size());
  for (double t : t_values) frames.push_back(decode(params, add_scaled(pd.mean, t * sd, pd.directions[component])));
  return frames;
}

Metrics cross_evaluate(const NetworkParams& params, std::span<const PairSample> pairs,
                       std::span<const Histogram> collection) {
  for (const auto& h : collection)
    if (h.height() != params.spec.image_height || h.width() != params.spec.image_width)
      fail(ErrorKind::ShapeMismatch, "dataset images are " + std::to_string(h.height()) + "x" +
                                         std::to_string(h.width()) + ", model expects " +
                                         std::to_string(params.spec.image_height) + "x" +
                                         std::to_string(params.spec.image_width));
  return evaluate(params, pairs, collection);
}

}  // namespace dwe
