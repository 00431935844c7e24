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

// Labelled synthetic 8-bit images standing in for handwritten-digit data:
// sparse, roughly centered strokes and blobs with per-sample jitter.

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "dwe/dataset_io.hpp"

namespace dwe {

enum class ShapeClass : std::uint8_t { Blob = 0, Ring = 1, Stroke = 2, Cross = 3 };
inline constexpr std::size_t kShapeClassCount = 4;

std::string_view to_string(ShapeClass c);

struct SyntheticConfig {
  std::size_t count = 5000;
  std::size_t height = 28;
  std::size_t width = 28;
  std::uint64_t seed = 1;
  /// Pixels below this fraction of the image maximum are set to zero.
  double cutoff = 0.1;
};

/// Classes cycle Blob, Ring, Stroke, Cross, so label i is i % 4. Every image
/// has at least one nonzero pixel.
ImageSet make_synthetic(const SyntheticConfig& cfg);

}  // namespace dwe
