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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dwe/histogram.hpp"

namespace dwe {

struct PlanEntry {
  std::size_t source_bin;
  std::size_t target_bin;
  double mass;
};

/// Sparse coupling between two histograms. Only basic (tree) arcs are
/// listed, so the entry count never exceeds m + n - 1.
struct TransportPlan {
  std::vector<PlanEntry> entries;
  double objective = 0.0;  // sum of mass * cost, in pixel^2
  double source_marginal_error = 0.0;
  double target_marginal_error = 0.0;
};

/// Dual potentials over the two supports. A certificate is valid when
/// u_i + v_j <= cost(i, j) everywhere and the primal/dual gap vanishes.
struct DualCertificate {
  std::vector<std::size_t> source_bins;
  std::vector<double> source_potentials;
  std::vector<std::size_t> target_bins;
  std::vector<double> target_potentials;
  double duality_gap = 0.0;
};

struct SolverOptions {
  std::size_t capacity = kDefaultCapacity;  // max support points per side
  /// Switch from block pricing to Bland's rule after this many pivots.
  /// Zero selects 100 * (m + n) + 10000.
  std::size_t bland_after = 0;
  /// Start from a northwest-corner basis over a shuffled support order
  /// instead of ascending bin order. Exercised by the tests.
  bool shuffle_initial_basis = false;
  std::uint64_t shuffle_seed = 0;
};

struct SolveStats {
  std::size_t pivots = 0;
  std::size_t degenerate_pivots = 0;
  bool used_bland = false;
};

struct ExactResult {
  double objective = 0.0;  // W2^2
  TransportPlan plan;
  DualCertificate certificate;
  SolveStats stats;
};

/// Exact squared 2-Wasserstein distance between two histograms on the same
/// grid, by network simplex over the strictly positive bins.
/// Throws DimensionMismatch or CapacityExceeded.
ExactResult w2_exact(const Histogram& a, const Histogram& b, const SolverOptions& options = {});

/// Same solver over explicit supports on a `cost` grid. Masses on each side
/// must sum to one within kMassTolerance.
ExactResult solve_transport(std::span<const SupportEntry> source, std::span<const SupportEntry> target,
                            const GroundCost& cost, const SolverOptions& options = {});

/// Closed-form W2^2 for single-row histograms: the integral of the squared
/// difference of the two quantile functions. Throws DimensionMismatch.
double w2_1d(const Histogram& a, const Histogram& b);

struct OptimalityReport {
  bool ok = false;
  double max_dual_violation = 0.0;       // max over pairs of u_i + v_j - cost
  double max_slackness_violation = 0.0;  // max |u_i + v_j - cost| on positive entries
  double duality_gap = 0.0;              // recomputed from the plan marginals
  std::string diagnostic;

  explicit operator bool() const noexcept { return ok; }
};

inline constexpr double kCertificateTolerance = 1e-7;

/// Checks dual feasibility, complementary slackness, and the duality gap.
OptimalityReport verify_optimality(const TransportPlan& plan, const DualCertificate& cert, const GroundCost& cost);

}  // namespace dwe
