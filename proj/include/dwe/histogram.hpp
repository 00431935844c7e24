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
#include <vector>

namespace dwe {

/// Absolute tolerance on the total mass of a histogram.
inline constexpr double kMassTolerance = 1e-9;

/// Default cap on the number of bins a solver accepts per side.
inline constexpr std::size_t kDefaultCapacity = 1024;

/// A probability mass over an H x W pixel grid, stored row-major:
/// bin (r, c) lives at index r * width + c.
///
/// Instances are validated on construction and immutable afterwards.
class Histogram {
 public:
  Histogram() = default;

  /// Wraps `mass` after checking that it is nonnegative, finite, and sums to
  /// one within kMassTolerance. Use normalize() for raw intensities.
  Histogram(std::size_t height, std::size_t width, std::vector<double> mass);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return mass_.size(); }
  bool empty() const noexcept { return mass_.empty(); }

  std::span<const double> mass() const noexcept { return mass_; }
  double operator[](std::size_t bin) const noexcept { return mass_[bin]; }
  double at(std::size_t row, std::size_t col) const noexcept { return mass_[row * width_ + col]; }

  bool same_shape(const Histogram& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> mass_;
};

/// Scales a nonnegative array to unit mass.
/// Throws AllZeroInput, NegativeEntry, or DimensionMismatch.
Histogram normalize(std::span<const double> raw, std::size_t height, std::size_t width);

/// Squared Euclidean distance between pixel centers, evaluated lazily.
class GroundCost {
 public:
  GroundCost(std::size_t height, std::size_t width) : height_(height), width_(width) {}

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t bins() const noexcept { return height_ * width_; }

  double operator()(std::size_t i, std::size_t j) const noexcept {
    const auto ri = static_cast<std::int64_t>(i / width_), ci = static_cast<std::int64_t>(i % width_);
    const auto rj = static_cast<std::int64_t>(j / width_), cj = static_cast<std::int64_t>(j % width_);
    return static_cast<double>((ri - rj) * (ri - rj) + (ci - cj) * (ci - cj));
  }

 private:
  std::size_t height_;
  std::size_t width_;
};

/// Throws DimensionOverflow when height * width exceeds `capacity`.
GroundCost ground_cost(std::size_t height, std::size_t width, std::size_t capacity = kDefaultCapacity);

/// Median entry of the full bin-to-bin cost table, optionally ignoring the
/// zero diagonal. Used to scale entropic regularization.
double median_cost(std::size_t height, std::size_t width, bool nonzero_only);

struct SupportEntry {
  std::size_t bin;
  double mass;

  friend bool operator==(const SupportEntry&, const SupportEntry&) = default;
};

struct Support {
  std::vector<SupportEntry> entries;  // ascending bin order, renormalized
  double dropped_mass = 0.0;          // mass of bins at or below the threshold
};

/// Keeps bins with mass strictly above `threshold` and renormalizes them.
/// Throws EmptySupport when nothing survives, InvalidArgument for a
/// threshold outside [0, 1).
Support support(const Histogram& h, double threshold = 0.0);

/// Inverse of support() for a lossless (threshold 0) extraction.
Histogram densify(const Support& s, std::size_t height, std::size_t width);

/// Sum of square roots of the bin masses; lower means sparser.
double half_norm_score(std::span<const double> mass);

}  // namespace dwe
