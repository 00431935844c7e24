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

// Data mining in the embedding: barycenters, interpolation, principal
// directions, and evaluation of a model on another dataset's pairs.

#include <cstddef>
#include <span>
#include <vector>

#include "dwe/histogram.hpp"
#include "dwe/model.hpp"
#include "dwe/training.hpp"

namespace dwe {

/// Convex weights. Entries must be nonnegative and sum to 1 within 1e-9;
/// zero entries are allowed so that one-hot weights select a single input.
struct BarycenterWeights {
  std::vector<double> alphas;

  static BarycenterWeights uniform(std::size_t n);
  /// Throws WeightError on a count mismatch, a negative or non-finite entry,
  /// or a bad sum.
  void validate(std::size_t count) const;
};

/// sum_i alpha_i e_i, accumulated in ascending weight order with ties broken
/// by lexicographic embedding order, so any joint permutation of the inputs
/// gives the same bits. Zero-weight terms are skipped.
EmbeddingVec weighted_embedding(std::span<const EmbeddingVec> embeddings, const BarycenterWeights& w);

/// decode(sum_i alpha_i embed(x_i)).
Histogram barycenter(const NetworkParams& params, std::span<const Histogram> hists, const BarycenterWeights& w);

/// decode((1 - t) embed(a) + t embed(b)) for t = 0, 1/(steps-1), ..., 1.
std::vector<Histogram> interpolate(const NetworkParams& params, const Histogram& a, const Histogram& b,
                                   std::size_t steps);

struct PrincipalDirections {
  EmbeddingVec mean;
  std::vector<std::vector<double>> directions;  // unit vectors, first significant coordinate positive
  std::vector<double> variances;                // nonincreasing, nonnegative
};

struct SymmetricEigen {
  std::vector<double> values;                // descending
  std::vector<std::vector<double>> vectors;  // vectors[k] pairs with values[k]
};

/// Cyclic Jacobi rotations on a dense symmetric n x n row-major matrix.
SymmetricEigen jacobi_eigen(std::span<const double> matrix, std::size_t n);

/// Centered covariance (divided by N) of the embeddings, row-major p x p.
std::vector<double> embedding_covariance(std::span<const EmbeddingVec> embeddings, const EmbeddingVec& mean);

/// Top-k eigenpairs of the embedding covariance. Throws InvalidArgument for
/// k outside [1, p] and InsufficientSamples for fewer than k + 1 embeddings.
PrincipalDirections principal_directions(std::span<const EmbeddingVec> embeddings, std::size_t k);

/// principal_directions over the embeddings of `hists`.
PrincipalDirections pga(const NetworkParams& params, std::span<const Histogram> hists, std::size_t k);

/// decode(mean + t sqrt(variance_c) direction_c) for every t; t counts
/// standard deviations. Throws IndexError for a missing component.
std::vector<Histogram> pga_walk(const NetworkParams& params, const PrincipalDirections& pd, std::size_t component,
                                std::span<const double> t_values);

/// evaluate() with a model trained elsewhere. Throws ShapeMismatch when the
/// collection's image size differs from the model's.
Metrics cross_evaluate(const NetworkParams& params, std::span<const PairSample> pairs,
                       std::span<const Histogram> collection);

}  // namespace dwe
