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

#include "dwe/entropic_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dwe/error.hpp"

namespace dwe {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Gibbs kernel exp(-C / eps) of the squared Euclidean grid cost, which
// factors into a row kernel and a column kernel.
class GridKernel {
 public:
  GridKernel(std::size_t height, std::size_t width, double eps) : h_(height), w_(width) {
    row_cost_.resize(h_ * h_);
    col_cost_.resize(w_ * w_);
    for (std::size_t r = 0; r < h_; ++r)
      for (std::size_t s = 0; s < h_; ++s) row_cost_[r * h_ + s] = sq(r, s) / eps;
    for (std::size_t c = 0; c < w_; ++c)
      for (std::size_t d = 0; d < w_; ++d) col_cost_[c * w_ + d] = sq(c, d) / eps;
    row_kernel_.resize(row_cost_.size());
    col_kernel_.resize(col_cost_.size());
    std::transform(row_cost_.begin(), row_cost_.end(), row_kernel_.begin(), [](double x) { return std::exp(-x); });
    std::transform(col_cost_.begin(), col_cost_.end(), col_kernel_.begin(), [](double x) { return std::exp(-x); });
    tmp_.resize(h_ * w_);
    terms_.resize(std::max(h_, w_));
  }

  std::size_t size() const { return h_ * w_; }

  // out = K in
  void apply(std::span<const double> in, std::span<double> out) {
    for (std::size_t r = 0; r < h_; ++r)
      for (std::size_t c = 0; c < w_; ++c) {
        double s = 0.0;
        for (std::size_t d = 0; d < w_; ++d) s += col_kernel_[c * w_ + d] * in[r * w_ + d];
        tmp_[r * w_ + c] = s;
      }
    for (std::size_t r = 0; r < h_; ++r)
      for (std::size_t c = 0; c < w_; ++c) {
        double s = 0.0;
        for (std::size_t q = 0; q < h_; ++q) s += row_kernel_[r * h_ + q] * tmp_[q * w_ + c];
        out[r * w_ + c] = s;
      }
  }

  // out_i = log sum_j exp(in_j - C_ij / eps)
  void apply_log(std::span<const double> in, std::span<double> out) {
    for (std::size_t r = 0; r < h_; ++r)
      for (std::size_t c = 0; c < w_; ++c) {
        for (std::size_t d = 0; d < w_; ++d) terms_[d] = in[r * w_ + d] - col_cost_[c * w_ + d];
        tmp_[r * w_ + c] = log_sum_exp(std::span<const double>(terms_.data(), w_));
      }
    for (std::size_t r = 0; r < h_; ++r)
      for (std::size_t c = 0; c < w_; ++c) {
        for (std::size_t q = 0; q < h_; ++q) terms_[q] = tmp_[q * w_ + c] - row_cost_[r * h_ + q];
        out[r * w_ + c] = log_sum_exp(std::span<const double>(terms_.data(), h_));
      }
  }

  double cost(std::size_t i, std::size_t j) const {
    return sq(i / w_, j / w_) + sq(i % w_, j % w_);
  }
  double scaled_cost(std::size_t i, std::size_t j) const {
    return row_cost_[(i / w_) * h_ + j / w_] + col_cost_[(i % w_) * w_ + j % w_];
  }
  double kernel(std::size_t i, std::size_t j) const {
    return row_kernel_[(i / w_) * h_ + j / w_] * col_kernel_[(i % w_) * w_ + j % w_];
  }

  static double log_sum_exp(std::span<const double> t) {
    double mx = kNegInf;
    for (double x : t) mx = std::max(mx, x);
    if (mx == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : t) s += std::exp(x - mx);
    return mx + std::log(s);
  }

 private:
  static double sq(std::size_t x, std::size_t y) {
    const double d = static_cast<double>(x) - static_cast<double>(y);
    return d * d;
  }

  std::size_t h_, w_;
  std::vector<double> row_cost_, col_cost_, row_kernel_, col_kernel_;
  std::vector<double> tmp_, terms_;
};

std::vector<double> log_of(std::span<const double> x) {
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [](double v) { return v > 0.0 ? std::log(v) : kNegInf; });
  return out;
}

double l1_violation_log(std::span<const double> log_scale, std::span<const double> log_kernel_sum,
                        std::span<const double> target) {
  double v = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double t = log_scale[i] + log_kernel_sum[i];
    v += std::abs((t == kNegInf ? 0.0 : std::exp(t)) - target[i]);
  }
  return v;
}

SinkhornResult sinkhorn_log(const Histogram& a, const Histogram& b, const SinkhornConfig& cfg) {
  GridKernel k(a.height(), a.width(), cfg.epsilon);
  const std::size_t n = k.size();
  const auto log_a = log_of(a.mass()), log_b = log_of(b.mass());
  std::vector<double> f(n, 0.0), g(n, 0.0), lg(n), lf(n);
  SinkhornResult res;
  for (res.iterations = 0; res.iterations < cfg.max_iters; ++res.iterations) {
    k.apply_log(g, lg);
    if (res.iterations > 0) {
      res.marginal_violation = l1_violation_log(f, lg, a.mass());
      if (res.marginal_violation <= cfg.tolerance) {
        res.converged = true;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) f[i] = log_a[i] == kNegInf ? kNegInf : log_a[i] - lg[i];
    k.apply_log(f, lf);
    for (std::size_t j = 0; j < n; ++j) g[j] = log_b[j] == kNegInf ? kNegInf : log_b[j] - lf[j];
  }
  if (!res.converged) {
    k.apply_log(g, lg);
    res.marginal_violation = l1_violation_log(f, lg, a.mass());
    res.converged = res.marginal_violation <= cfg.tolerance;
  }
  double obj = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (f[i] == kNegInf) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (g[j] == kNegInf) continue;
      obj += std::exp(f[i] + g[j] - k.scaled_cost(i, j)) * k.cost(i, j);
    }
  }
  res.objective = obj;
  return res;
}

SinkhornResult sinkhorn_kernel(const Histogram& a, const Histogram& b, const SinkhornConfig& cfg) {
  GridKernel k(a.height(), a.width(), cfg.epsilon);
  const std::size_t n = k.size();
  std::vector<double> u(n, 1.0), v(n, 1.0), kv(n), ku(n);
  auto scale = [](std::span<const double> target, std::span<const double> denom, std::span<double> out) {
    for (std::size_t i = 0; i < target.size(); ++i) {
      if (target[i] == 0.0) {
        out[i] = 0.0;
        continue;
      }
      if (!(denom[i] > 0.0) || !std::isfinite(denom[i]))
        fail(ErrorKind::NumericalUnderflow, "Gibbs kernel underflowed; use the log-domain solver");
      out[i] = target[i] / denom[i];
      if (!std::isfinite(out[i])) fail(ErrorKind::NumericalUnderflow, "scaling vector overflowed");
    }
  };
  SinkhornResult res;
  auto violation = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(u[i] * kv[i] - a[i]);
    return s;
  };
  for (res.iterations = 0; res.iterations < cfg.max_iters; ++res.iterations) {
    k.apply(v, kv);
    if (res.iterations > 0) {
      res.marginal_violation = violation();
      if (res.marginal_violation <= cfg.tolerance) {
        res.converged = true;
        break;
      }
    }
    scale(a.mass(), kv, u);
    k.apply(u, ku);
    scale(b.mass(), ku, v);
  }
  if (!res.converged) {
    k.apply(v, kv);
    res.marginal_violation = violation();
    res.converged = res.marginal_violation <= cfg.tolerance;
  }
  double obj = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (u[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) obj += u[i] * k.kernel(i, j) * v[j] * k.cost(i, j);
  }
  res.objective = obj;
  return res;
}

}  // namespace

void SinkhornConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail(ErrorKind::InvalidArgument, "sinkhorn epsilon must be positive");
  if (!(tolerance > 0.0)) fail(ErrorKind::InvalidArgument, "sinkhorn tolerance must be positive");
  if (max_iters == 0) fail(ErrorKind::InvalidArgument, "sinkhorn max_iters must be positive");
}

SinkhornConfig default_sinkhorn_config(std::size_t height, std::size_t width) {
  SinkhornConfig cfg;
  cfg.epsilon = 0.05 * median_cost(height, width, /*nonzero_only=*/true);
  if (cfg.epsilon <= 0.0) cfg.epsilon = 0.05;
  return cfg;
}

SinkhornResult sinkhorn_w2(const Histogram& a, const Histogram& b, const SinkhornConfig& cfg) {
  cfg.validate();
  if (!a.same_shape(b)) fail(ErrorKind::DimensionMismatch, "histograms live on different grids");
  return cfg.log_domain ? sinkhorn_log(a, b, cfg) : sinkhorn_kernel(a, b, cfg);
}

BarycenterResult bregman_barycenter(std::span<const Histogram> hists, std::span<const double> weights,
                                    const SinkhornConfig& cfg) {
  cfg.validate();
  if (hists.empty()) fail(ErrorKind::InvalidArgument, "barycenter needs at least one histogram");
  if (weights.size() != hists.size()) fail(ErrorKind::WeightError, "one weight per histogram required");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorKind::WeightError, "weights must be nonnegative");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > kMassTolerance) fail(ErrorKind::WeightError, "weights must sum to one");
  for (const auto& h : hists)
    if (!h.same_shape(hists[0])) fail(ErrorKind::DimensionMismatch, "histograms live on different grids");

  const std::size_t height = hists[0].height(), width = hists[0].width();
  GridKernel k(height, width, cfg.epsilon);
  const std::size_t n = k.size(), count = hists.size();

  // Coupling k is diag(e^f_k) K diag(e^g_k): rows must match input k,
  // columns the shared barycenter p.
  std::vector<std::vector<double>> log_in(count), f(count, std::vector<double>(n, 0.0)),
      g(count, std::vector<double>(n, 0.0)), lf(count, std::vector<double>(n));
  for (std::size_t s = 0; s < count; ++s) log_in[s] = log_of(hists[s].mass());
  std::vector<double> lg(n), log_p(n, 0.0);

  BarycenterResult res;
  for (res.iterations = 0; res.iterations < cfg.max_iters; ++res.iterations) {
    double violation = 0.0;
    for (std::size_t s = 0; s < count; ++s) {
      k.apply_log(g[s], lg);
      if (res.iterations > 0) violation += weights[s] * l1_violation_log(f[s], lg, hists[s].mass());
      for (std::size_t i = 0; i < n; ++i) f[s][i] = log_in[s][i] == kNegInf ? kNegInf : log_in[s][i] - lg[i];
    }
    if (res.iterations > 0) {
      res.residual = violation;
      if (violation <= cfg.tolerance) {
        res.converged = true;
        break;
      }
    }
    std::fill(log_p.begin(), log_p.end(), 0.0);
    for (std::size_t s = 0; s < count; ++s) {
      k.apply_log(f[s], lf[s]);
      for (std::size_t j = 0; j < n; ++j) log_p[j] += weights[s] * (g[s][j] + lf[s][j]);
    }
    for (std::size_t s = 0; s < count; ++s)
      for (std::size_t j = 0; j < n; ++j) g[s][j] = log_p[j] - lf[s][j];
  }

  std::vector<double> p(n);
  const double mx = *std::max_element(log_p.begin(), log_p.end());
  for (std::size_t j = 0; j < n; ++j) p[j] = std::exp(log_p[j] - mx);
  res.barycenter = normalize(p, height, width);
  return res;
}

}  // namespace dwe
