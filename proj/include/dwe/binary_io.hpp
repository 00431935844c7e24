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

// Little-endian byte buffers and CRC-32 for the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dwe/error.hpp"

namespace dwe::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

/// CRC-32 (IEEE 802.3, as in zlib/PNG).
std::uint32_t crc32(std::span<const std::uint8_t> bytes, std::uint32_t seed = 0);

class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  template <typename T>
  void put(T v) {
    bytes(&v, sizeof v);
  }
  void f64s(std::span<const double> v) { bytes(v.data(), v.size_bytes()); }
  /// Appends the CRC-32 of everything written so far.
  void seal() { put<std::uint32_t>(crc32(buf_)); }

  const std::vector<std::uint8_t>& buffer() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

/// Bounds-checked reader; running past the end throws TruncatedFile.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof v).data(), sizeof v);
    return v;
  }
  std::uint32_t get_be32() {
    const auto b = take(4);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > remaining()) fail(ErrorKind::TruncatedFile, "unexpected end of data");
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  void f64s(std::span<double> out) { std::memcpy(out.data(), take(out.size_bytes()).data(), out.size_bytes()); }

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

/// Splits off a trailing CRC-32 and checks it. Throws ChecksumMismatch.
std::span<const std::uint8_t> verify_sealed(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace dwe::io
