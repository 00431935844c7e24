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

// Image dataset files (IDX, NPY u8 bitmaps), IDX label files, and PGM output.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dwe/histogram.hpp"

namespace dwe {

enum class DatasetFormat { Idx, Npy };

struct DatasetManifest {
  std::filesystem::path source;
  DatasetFormat format = DatasetFormat::Idx;
  std::size_t image_count = 0;  // images in the file, including skipped ones
  std::size_t height = 0;
  std::size_t width = 0;
  std::uint32_t checksum = 0;  // CRC-32 of the file bytes
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<Histogram> images;
  std::vector<std::size_t> source_index;  // position in the file of each kept image
  std::size_t skipped = 0;                // all-zero images dropped
  std::vector<std::string> warnings;
};

/// Raw 8-bit images, row-major, stored back to back.
struct ImageSet {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<std::uint8_t> labels;  // empty or one per image

  std::size_t pixels_per_image() const { return height * width; }
  std::size_t count() const { return pixels_per_image() == 0 ? 0 : pixels.size() / pixels_per_image(); }
  std::span<const std::uint8_t> image(std::size_t i) const {
    return std::span<const std::uint8_t>(pixels).subspan(i * pixels_per_image(), pixels_per_image());
  }
};

/// IDX u8 image tensor (magic 0x00000803). When `expected_checksum` is given
/// the file bytes must match it (ChecksumMismatch otherwise).
Dataset parse_idx(const std::filesystem::path& path, std::optional<std::uint32_t> expected_checksum = {});
Dataset parse_idx_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& source = {},
                        std::optional<std::uint32_t> expected_checksum = {});

/// NPY 1.0/2.0 with dtype '|u1', C order, shape (N, H*W) for square images or
/// (N, H, W).
Dataset parse_npy_bitmaps(const std::filesystem::path& path, std::optional<std::uint32_t> expected_checksum = {});
Dataset parse_npy_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& source = {},
                        std::optional<std::uint32_t> expected_checksum = {});

/// Chooses the parser from the file's leading bytes.
Dataset load_dataset(const std::filesystem::path& path, std::optional<std::uint32_t> expected_checksum = {});

/// IDX u8 label vector (magic 0x00000801).
std::vector<std::uint8_t> parse_idx_labels(const std::filesystem::path& path);
std::vector<std::uint8_t> parse_idx_labels_bytes(std::span<const std::uint8_t> bytes);

/// Labels of the images kept in `ds`. Throws DimensionMismatch when the label
/// count differs from the file's image count.
std::vector<std::uint8_t> kept_labels(const Dataset& ds, std::span<const std::uint8_t> file_labels);

std::vector<std::uint8_t> encode_idx_images(const ImageSet& images);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels);
/// `flat` selects shape (N, H*W) instead of (N, H, W).
std::vector<std::uint8_t> encode_npy(const ImageSet& images, bool flat = true, int major_version = 1);

inline constexpr std::uint8_t kGridSeparator = 128;

/// Binary PGM (P5) of the histograms tiled row-major, `cols` per row, with a
/// 1-pixel separator of value kGridSeparator. Each tile is scaled to 0..255 by
/// its own maximum. All histograms must share one shape.
std::vector<std::uint8_t> render_image_grid(std::span<const Histogram> hists, std::size_t cols);
void emit_image_grid(std::span<const Histogram> hists, std::size_t cols, const std::filesystem::path& path);

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

GrayImage parse_pgm(std::span<const std::uint8_t> bytes);
GrayImage read_pgm(const std::filesystem::path& path);

}  // namespace dwe
