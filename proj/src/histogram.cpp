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

#include "dwe/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dwe/error.hpp"

namespace dwe {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::AllZeroInput: return "AllZeroInput";
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::DimensionOverflow: return "DimensionOverflow";
    case ErrorKind::EmptySupport: return "EmptySupport";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::CapacityExceeded: return "CapacityExceeded";
    case ErrorKind::NumericalUnderflow: return "NumericalUnderflow";
    case ErrorKind::WeightError: return "WeightError";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorKind::VersionUnsupported: return "VersionUnsupported";
    case ErrorKind::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorKind::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::EmptyTestSet: return "EmptyTestSet";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::IndexError: return "IndexError";
    case ErrorKind::WorkerFailure: return "WorkerFailure";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Histogram::Histogram(std::size_t height, std::size_t width, std::vector<double> mass)
    : height_(height), width_(width), mass_(std::move(mass)) {
  if (height_ == 0 || width_ == 0) fail(ErrorKind::InvalidArgument, "histogram dimensions must be positive");
  if (mass_.size() != height_ * width_) {
    std::ostringstream os;
    os << "mass has " << mass_.size() << " entries, expected " << height_ << "x" << width_;
    fail(ErrorKind::DimensionMismatch, os.str());
  }
  double total = 0.0;
  for (double m : mass_) {
    if (!std::isfinite(m)) fail(ErrorKind::InvalidArgument, "histogram mass is not finite");
    if (m < 0.0) fail(ErrorKind::NegativeEntry, "histogram mass is negative");
    total += m;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "histogram mass sums to " << total;
    fail(ErrorKind::InvalidArgument, os.str());
  }
}

Histogram normalize(std::span<const double> raw, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) fail(ErrorKind::InvalidArgument, "histogram dimensions must be positive");
  if (raw.size() != height * width) fail(ErrorKind::DimensionMismatch, "raw array length differs from height*width");
  double total = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "raw entry is not finite");
    if (v < 0.0) fail(ErrorKind::NegativeEntry, "raw entry is negative");
    total += v;
  }
  if (total == 0.0) fail(ErrorKind::AllZeroInput, "every entry is zero");
  std::vector<double> mass(raw.begin(), raw.end());
  for (double& m : mass) m /= total;
  return Histogram(height, width, std::move(mass));
}

GroundCost ground_cost(std::size_t height, std::size_t width, std::size_t capacity) {
  if (height == 0 || width == 0) fail(ErrorKind::InvalidArgument, "grid dimensions must be positive");
  if (height > capacity || width > capacity || height * width > capacity) {
    std::ostringstream os;
    os << height << "x" << width << " grid exceeds capacity " << capacity;
    fail(ErrorKind::DimensionOverflow, os.str());
  }
  return GroundCost(height, width);
}

double median_cost(std::size_t height, std::size_t width, bool nonzero_only) {
  // Count cost values by their integer magnitude: the table has at most
  // (H-1)^2 + (W-1)^2 + 1 distinct entries, so this stays linear-ish.
  const std::size_t max_cost = (height - 1) * (height - 1) + (width - 1) * (width - 1);
  std::vector<std::uint64_t> counts(max_cost + 1, 0);
  for (std::size_t dr = 0; dr < height; ++dr) {
    const std::uint64_t row_pairs = dr == 0 ? height : 2 * (height - dr);
    for (std::size_t dc = 0; dc < width; ++dc) {
      const std::uint64_t col_pairs = dc == 0 ? width : 2 * (width - dc);
      counts[dr * dr + dc * dc] += row_pairs * col_pairs;
    }
  }
  if (nonzero_only) counts[0] = 0;
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) return 0.0;
  // Lower and upper middle for an even count, averaged.
  auto kth = [&](std::uint64_t k) {
    std::uint64_t seen = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      seen += counts[c];
      if (seen > k) return static_cast<double>(c);
    }
    return static_cast<double>(max_cost);
  };
  return total % 2 == 1 ? kth(total / 2) : 0.5 * (kth(total / 2 - 1) + kth(total / 2));
}

Support support(const Histogram& h, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0)) fail(ErrorKind::InvalidArgument, "support threshold must lie in [0, 1)");
  Support out;
  double kept = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] > threshold) {
      out.entries.push_back({i, h[i]});
      kept += h[i];
    } else {
      out.dropped_mass += h[i];
    }
  }
  if (out.entries.empty()) fail(ErrorKind::EmptySupport, "no bin exceeds the support threshold");
  if (out.dropped_mass > 0.0)
    for (auto& e : out.entries) e.mass /= kept;
  return out;
}

Histogram densify(const Support& s, std::size_t height, std::size_t width) {
  std::vector<double> mass(height * width, 0.0);
  for (const auto& e : s.entries) {
    if (e.bin >= mass.size()) fail(ErrorKind::IndexError, "support bin outside the grid");
    mass[e.bin] = e.mass;
  }
  return Histogram(height, width, std::move(mass));
}

double half_norm_score(std::span<const double> mass) {
  double s = 0.0;
  for (double m : mass) s += std::sqrt(std::max(m, 0.0));
  return s;
}

}  // namespace dwe
