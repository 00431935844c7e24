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

// Pair datasets labelled by the exact solver, splits, and the siamese
// autoencoder training loop with validation-based early stopping.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dwe/autodiff.hpp"
#include "dwe/error.hpp"
#include "dwe/exact_ot.hpp"
#include "dwe/histogram.hpp"
#include "dwe/model.hpp"

namespace dwe {

struct PairSample {
  std::uint32_t idx1 = 0;
  std::uint32_t idx2 = 0;
  double y = 0.0;  // exact squared distance, pixel^2 units

  friend bool operator==(const PairSample&, const PairSample&) = default;
};

/// CRC-32 over the shape and raw masses of every histogram, in order.
std::uint32_t collection_checksum(std::span<const Histogram> collection);

// ---- pair files ("WPR1") ---------------------------------------------------

struct PairFile {
  std::uint32_t collection_checksum = 0;
  std::vector<PairSample> pairs;

  friend bool operator==(const PairFile&, const PairFile&) = default;
};

std::vector<std::uint8_t> serialize_pairs(const PairFile& file);
/// Throws BadMagic, TruncatedFile, ChecksumMismatch, or MalformedHeader.
PairFile parse_pairs(std::span<const std::uint8_t> bytes);
void save_pairs(const PairFile& file, const std::filesystem::path& path);
PairFile load_pairs(const std::filesystem::path& path);

/// Throws IndexError when a pair references a histogram outside the
/// collection, DimensionMismatch when the collection checksum differs.
void check_pairs(const PairFile& file, std::span<const Histogram> collection);

// ---- generation ------------------------------------------------------------

struct PairGenOptions {
  std::size_t workers = 1;
  /// Draw idx2 independently of idx1, so (i, i) pairs with label 0 occur.
  bool allow_self_pairs = false;
  SolverOptions solver{};
  /// Called from worker threads after each labelled pair with its draw
  /// index. An exception thrown here is a worker failure.
  std::function<void(std::size_t)> on_labelled;
};

/// Where an interrupted generation run can pick up: every draw below
/// `completed` has a verified label in the accompanying prefix.
struct ResumeToken {
  std::uint64_t seed = 0;
  std::size_t n_pairs = 0;
  std::size_t completed = 0;
};

class PairGenerationError : public Error {
 public:
  PairGenerationError(const std::string& what, ResumeToken token, std::vector<PairSample> prefix)
      : Error(ErrorKind::WorkerFailure, what), token_(token), prefix_(std::move(prefix)) {}
  const ResumeToken& token() const noexcept { return token_; }
  const std::vector<PairSample>& prefix() const noexcept { return prefix_; }

 private:
  ResumeToken token_;
  std::vector<PairSample> prefix_;
};

/// Draws `n_pairs` index pairs uniformly with replacement from a seeded
/// generator and labels each with the exact solver, verifying its
/// certificate. Output is in draw order and independent of `workers`.
/// A one-element collection yields (0, 0) pairs with label 0.
/// Propagates CapacityExceeded; other worker failures throw
/// PairGenerationError.
std::vector<PairSample> generate_pairs(std::span<const Histogram> collection, std::size_t n_pairs, std::uint64_t seed,
                                       const PairGenOptions& opts = {});

/// Continues a run that threw PairGenerationError. The result equals the
/// uninterrupted run bitwise.
std::vector<PairSample> resume_pairs(std::span<const Histogram> collection, const ResumeToken& token,
                                     std::span<const PairSample> prefix, const PairGenOptions& opts = {});

// ---- splits ----------------------------------------------------------------

struct SplitSpec {
  double train_fraction = 0.7;
  double val_fraction = 0.2;
  double test_fraction = 0.1;

  /// Each fraction in (0, 1), sum 1 within 1e-9; InvalidArgument otherwise.
  void validate() const;
};

struct SplitResult {
  std::vector<PairSample> train, val, test;
  std::vector<std::string> warnings;
};

/// Seeded shuffle, then val = round(f_val n), test = round(f_test n), and the
/// rest train. Empty val or test parts are reported as warnings.
SplitResult split(std::span<const PairSample> pairs, const SplitSpec& spec, std::uint64_t seed);

// ---- training --------------------------------------------------------------

struct TrainConfig {
  double lambda = 1.0;             // reconstruction weight
  double sparsity_weight = 1e-3;   // weight of the square-root penalty on reconstructions
  std::size_t batch_size = 128;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  AdamConfig adam{};
  double time_budget_seconds = 0;  // stop after the epoch that exceeds it; 0 disables

  void validate() const;
};

struct LossTerms {
  double distance = 0.0;
  double kl = 0.0;
  double sparsity = 0.0;
  double total = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  LossTerms train;
  LossTerms val;
  double seconds = 0.0;
};

struct TrainingReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_total = 0.0;
  std::string stop_reason;

  /// One line per epoch: epoch, train_dist, train_kl, train_sparse, val_total
  /// separated by tabs.
  std::string to_tsv() const;
};

struct TrainResult {
  NetworkParams params;
  TrainingReport report;
};

/// Mean per-pair losses of `params` on `pairs`. The reconstruction terms sum
/// over both members of a pair; with lambda = 0 the decoder is not run and
/// both reconstruction terms are 0.
LossTerms pair_losses(const NetworkParams& params, std::span<const PairSample> pairs,
                      std::span<const Histogram> collection, const TrainConfig& cfg);

/// Minibatch Adam on distance + lambda * KL + sparsity_weight * sparsity.
/// Returns the parameters of the best validation epoch. Throws NonFiniteLoss
/// naming the epoch, batch, and term.
TrainResult train(const NetworkParams& init, std::span<const PairSample> train_pairs,
                  std::span<const PairSample> val_pairs, std::span<const Histogram> collection,
                  const TrainConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch = {});

// ---- evaluation ------------------------------------------------------------

struct Metrics {
  double mse = 0.0;
  double relative_mse = 0.0;
  double correlation = 0.0;
  bool correlation_defined = true;  // false when either side is constant
  std::size_t count = 0;
};

Metrics compute_metrics(std::span<const double> predicted, std::span<const double> actual);

/// Predicts every pair with predict_w2. Throws EmptyTestSet.
Metrics evaluate(const NetworkParams& params, std::span<const PairSample> pairs, std::span<const Histogram> collection);

enum class BenchMode { Indep, Pairwise, ExactLp };

std::string_view to_string(BenchMode m);

struct BenchResult {
  BenchMode mode = BenchMode::Indep;
  std::size_t distances = 0;
  double seconds = 0.0;
  double rate = 0.0;       // distances per second
  double checksum = 0.0;   // sum of the computed distances
};

struct BenchOptions {
  bool single_precision = true;  // float32 encoder for the embedding modes
  std::size_t max_pairs = 0;     // 0 uses every pair
};

/// Indep: embed both members of every pair, then one distance per pair.
/// Pairwise: embed the distinct idx1 and idx2 histograms once, then every
/// distance between the two sets. ExactLp: the exact solver on every pair.
BenchResult bench_throughput(const NetworkParams& params, std::span<const PairSample> pairs,
                             std::span<const Histogram> collection, BenchMode mode, const BenchOptions& opts = {});

}  // namespace dwe
