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

#include <cstddef>
#include <span>
#include <vector>

#include "dwe/histogram.hpp"

namespace dwe {

struct SinkhornConfig {
  double epsilon = 1.0;  // pixel^2
  std::size_t max_iters = 10000;
  double tolerance = 1e-6;  // L1 marginal violation
  bool log_domain = true;

  /// Throws InvalidArgument unless epsilon, tolerance, and max_iters are positive.
  void validate() const;
};

/// epsilon = 0.05 * median of the nonzero grid costs, other fields default.
SinkhornConfig default_sinkhorn_config(std::size_t height, std::size_t width);

struct SinkhornResult {
  double objective = 0.0;  // <pi, C> without the entropy term
  std::size_t iterations = 0;
  double marginal_violation = 0.0;
  bool converged = false;
};

/// Entropic OT between two histograms on one grid with the squared
/// Euclidean pixel cost. The Gibbs kernel is applied separably along rows
/// and columns. Throws DimensionMismatch, InvalidArgument, and (kernel
/// domain only) NumericalUnderflow.
SinkhornResult sinkhorn_w2(const Histogram& a, const Histogram& b, const SinkhornConfig& cfg);

struct BarycenterResult {
  Histogram barycenter;
  std::size_t iterations = 0;
  double residual = 0.0;  // weighted L1 violation of the input marginals
  bool converged = false;
};

/// Entropic barycenter by iterated Bregman (KL) projections.
/// Throws DimensionMismatch or WeightError.
BarycenterResult bregman_barycenter(std::span<const Histogram> hists, std::span<const double> weights,
                                    const SinkhornConfig& cfg);

}  // namespace dwe
