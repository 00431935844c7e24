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

#include "dwe/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <limits>
#include <string_view>

#include "dwe/binary_io.hpp"
#include "dwe/error.hpp"

namespace dwe {
namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
constexpr char kNpyMagic[] = "\x93NUMPY";
constexpr std::size_t kNpyMagicLen = 6;

std::size_t checked_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a)
    fail(ErrorKind::MalformedHeader, "dimension product overflows");
  return a * b;
}

void check_expected(std::uint32_t crc, std::optional<std::uint32_t> expected) {
  if (expected && *expected != crc) fail(ErrorKind::ChecksumMismatch, "dataset bytes do not match the manifest checksum");
}

// Exact payload length check shared by both formats.
void check_payload(std::size_t have, std::size_t want) {
  if (have < want) fail(ErrorKind::TruncatedFile, "file shorter than its header declares");
  if (have > want) fail(ErrorKind::MalformedHeader, "trailing bytes after the declared payload");
}

Dataset build_dataset(std::span<const std::uint8_t> payload, std::size_t count, std::size_t h, std::size_t w,
                      DatasetManifest manifest) {
  Dataset ds;
  ds.manifest = std::move(manifest);
  const std::size_t px = h * w;
  std::vector<double> raw(px);
  ds.images.reserve(count);
  ds.source_index.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto img = payload.subspan(i * px, px);
    if (std::all_of(img.begin(), img.end(), [](std::uint8_t v) { return v == 0; })) {
      ++ds.skipped;
      continue;
    }
    std::copy(img.begin(), img.end(), raw.begin());
    ds.images.push_back(normalize(raw, h, w));
    ds.source_index.push_back(i);
  }
  if (ds.skipped > 0)
    ds.warnings.push_back("skipped " + std::to_string(ds.skipped) + " all-zero image(s) of " + std::to_string(count));
  return ds;
}

// Minimal reader for the Python dict literal in an NPY header:
// {'descr': '|u1', 'fortran_order': False, 'shape': (N, 784), }
class NpyHeader {
 public:
  explicit NpyHeader(std::string_view text) : s_(text) {}

  void parse() {
    spaces();
    expect('{');
    bool have_descr = false, have_order = false, have_shape = false;
    while (true) {
      spaces();
      if (peek() == '}') break;
      const std::string key = quoted();
      spaces();
      expect(':');
      spaces();
      if (key == "descr" && !have_descr) {
        descr = quoted();
        have_descr = true;
      } else if (key == "fortran_order" && !have_order) {
        fortran_order = boolean();
        have_order = true;
      } else if (key == "shape" && !have_shape) {
        shape = tuple();
        have_shape = true;
      } else {
        bad("unexpected or repeated key '" + key + "'");
      }
      spaces();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      spaces();
      if (peek() != '}') bad("expected ',' or '}'");
    }
    ++pos_;
    spaces();
    if (pos_ + 1 != s_.size() || s_[pos_] != '\n') bad("header must end with spaces and a newline");
    if (!have_descr || !have_order || !have_shape) bad("header lacks descr, fortran_order, or shape");
  }

  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;

 private:
  [[noreturn]] void bad(const std::string& what) const {
    fail(ErrorKind::MalformedHeader, "NPY header: " + what + " at offset " + std::to_string(pos_));
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void spaces() {
    while (peek() == ' ') ++pos_;
  }
  void expect(char c) {
    if (peek() != c) bad(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string quoted() {
    expect('\'');
    std::string out;
    while (peek() != '\'') {
      const char c = peek();
      if (c == '\0' || c == '\n' || c == '\\') bad("unterminated string");
      out.push_back(c);
      ++pos_;
    }
    ++pos_;
    return out;
  }
  bool boolean() {
    if (s_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    bad("expected True or False");
  }
  std::size_t integer() {
    if (peek() < '0' || peek() > '9') bad("expected a dimension");
    if (peek() == '0' && pos_ + 1 < s_.size() && s_[pos_ + 1] >= '0' && s_[pos_ + 1] <= '9') bad("leading zero");
    std::size_t v = 0;
    int digits = 0;
    while (peek() >= '0' && peek() <= '9') {
      if (++digits > 12) bad("dimension too large");
      v = v * 10 + static_cast<std::size_t>(peek() - '0');
      ++pos_;
    }
    return v;
  }
  std::vector<std::size_t> tuple() {
    expect('(');
    std::vector<std::size_t> dims;
    spaces();
    while (peek() != ')') {
      dims.push_back(integer());
      spaces();
      if (peek() == ',') {
        ++pos_;
        spaces();
      } else if (peek() != ')') {
        bad("expected ',' or ')' in shape");
      }
    }
    ++pos_;
    return dims;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::size_t exact_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r * r == n ? r : 0;
}

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

}  // namespace

Dataset parse_idx_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& source,
                        std::optional<std::uint32_t> expected_checksum) {
  const std::uint32_t crc = io::crc32(bytes);
  check_expected(crc, expected_checksum);
  io::ByteReader r(bytes);
  const std::uint32_t magic = r.get_be32();
  if (magic != kIdxImagesMagic) fail(ErrorKind::BadMagic, "not an IDX u8 image file (magic 0x00000803)");
  const std::size_t n = r.get_be32(), h = r.get_be32(), w = r.get_be32();
  if (n == 0 || h == 0 || w == 0) fail(ErrorKind::MalformedHeader, "IDX dimensions must be positive");
  check_payload(r.remaining(), checked_mul(n, checked_mul(h, w)));
  DatasetManifest m{source, DatasetFormat::Idx, n, h, w, crc};
  return build_dataset(r.take(r.remaining()), n, h, w, std::move(m));
}

Dataset parse_idx(const std::filesystem::path& path, std::optional<std::uint32_t> expected_checksum) {
  return parse_idx_bytes(io::read_file(path), path, expected_checksum);
}

Dataset parse_npy_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& source,
                        std::optional<std::uint32_t> expected_checksum) {
  const std::uint32_t crc = io::crc32(bytes);
  check_expected(crc, expected_checksum);
  io::ByteReader r(bytes);
  if (bytes.size() < kNpyMagicLen) fail(ErrorKind::TruncatedFile, "file shorter than the NPY magic");
  if (std::memcmp(r.take(kNpyMagicLen).data(), kNpyMagic, kNpyMagicLen) != 0)
    fail(ErrorKind::BadMagic, "not an NPY file");
  const auto major = r.get<std::uint8_t>();
  const auto minor = r.get<std::uint8_t>();
  if ((major != 1 && major != 2) || minor != 0)
    fail(ErrorKind::VersionUnsupported, "NPY version " + std::to_string(major) + "." + std::to_string(minor));
  const std::size_t header_len = major == 1 ? r.get<std::uint16_t>() : r.get<std::uint32_t>();
  const auto header_bytes = r.take(header_len);
  NpyHeader header(std::string_view(reinterpret_cast<const char*>(header_bytes.data()), header_bytes.size()));
  header.parse();
  if (header.descr != "|u1") fail(ErrorKind::UnsupportedDtype, "dtype '" + header.descr + "' (only '|u1' accepted)");
  if (header.fortran_order) fail(ErrorKind::UnsupportedOrder, "column-major (fortran_order) arrays are rejected");
  std::size_t n = 0, h = 0, w = 0;
  if (header.shape.size() == 2) {
    n = header.shape[0];
    h = w = exact_sqrt(header.shape[1]);
    if (h == 0) fail(ErrorKind::MalformedHeader, "flat image length is not a perfect square");
  } else if (header.shape.size() == 3) {
    n = header.shape[0], h = header.shape[1], w = header.shape[2];
  } else {
    fail(ErrorKind::MalformedHeader, "shape must be (N, H*W) or (N, H, W)");
  }
  if (n == 0 || h == 0 || w == 0) fail(ErrorKind::MalformedHeader, "NPY dimensions must be positive");
  check_payload(r.remaining(), checked_mul(n, checked_mul(h, w)));
  DatasetManifest m{source, DatasetFormat::Npy, n, h, w, crc};
  return build_dataset(r.take(r.remaining()), n, h, w, std::move(m));
}

Dataset parse_npy_bitmaps(const std::filesystem::path& path, std::optional<std::uint32_t> expected_checksum) {
  return parse_npy_bytes(io::read_file(path), path, expected_checksum);
}

Dataset load_dataset(const std::filesystem::path& path, std::optional<std::uint32_t> expected_checksum) {
  const auto bytes = io::read_file(path);
  if (!bytes.empty() && bytes[0] == 0x93) return parse_npy_bytes(bytes, path, expected_checksum);
  return parse_idx_bytes(bytes, path, expected_checksum);
}

std::vector<std::uint8_t> parse_idx_labels_bytes(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  if (r.get_be32() != kIdxLabelsMagic) fail(ErrorKind::BadMagic, "not an IDX label file (magic 0x00000801)");
  const std::size_t n = r.get_be32();
  check_payload(r.remaining(), n);
  const auto body = r.take(n);
  return {body.begin(), body.end()};
}

std::vector<std::uint8_t> parse_idx_labels(const std::filesystem::path& path) {
  return parse_idx_labels_bytes(io::read_file(path));
}

std::vector<std::uint8_t> kept_labels(const Dataset& ds, std::span<const std::uint8_t> file_labels) {
  if (file_labels.size() != ds.manifest.image_count)
    fail(ErrorKind::DimensionMismatch, "label count " + std::to_string(file_labels.size()) + " differs from image count " +
                                           std::to_string(ds.manifest.image_count));
  std::vector<std::uint8_t> out;
  out.reserve(ds.source_index.size());
  for (std::size_t i : ds.source_index) out.push_back(file_labels[i]);
  return out;
}

std::vector<std::uint8_t> encode_idx_images(const ImageSet& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  append_be32(out, kIdxImagesMagic);
  append_be32(out, static_cast<std::uint32_t>(images.count()));
  append_be32(out, static_cast<std::uint32_t>(images.height));
  append_be32(out, static_cast<std::uint32_t>(images.width));
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  append_be32(out, kIdxLabelsMagic);
  append_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

std::vector<std::uint8_t> encode_npy(const ImageSet& images, bool flat, int major_version) {
  if (major_version != 1 && major_version != 2) fail(ErrorKind::InvalidArgument, "NPY major version must be 1 or 2");
  std::string dict = "{'descr': '|u1', 'fortran_order': False, 'shape': (" + std::to_string(images.count()) + ", ";
  dict += flat ? std::to_string(images.pixels_per_image()) + "), }"
               : std::to_string(images.height) + ", " + std::to_string(images.width) + "), }";
  const std::size_t prefix = kNpyMagicLen + 2 + (major_version == 1 ? 2 : 4);
  std::size_t total = prefix + dict.size() + 1;
  total = (total + 63) / 64 * 64;
  dict.append(total - prefix - dict.size() - 1, ' ');
  dict.push_back('\n');
  std::vector<std::uint8_t> out(kNpyMagic, kNpyMagic + kNpyMagicLen);
  out.push_back(static_cast<std::uint8_t>(major_version));
  out.push_back(0);
  const auto len = static_cast<std::uint32_t>(dict.size());
  out.push_back(static_cast<std::uint8_t>(len & 0xff));
  out.push_back(static_cast<std::uint8_t>(len >> 8));
  if (major_version == 2) {
    out.push_back(static_cast<std::uint8_t>(len >> 16));
    out.push_back(static_cast<std::uint8_t>(len >> 24));
  }
  out.insert(out.end(), dict.begin(), dict.end());
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> render_image_grid(std::span<const Histogram> hists, std::size_t cols) {
  if (hists.empty()) fail(ErrorKind::InvalidArgument, "image grid needs at least one histogram");
  if (cols == 0) fail(ErrorKind::InvalidArgument, "image grid needs at least one column");
  const std::size_t h = hists[0].height(), w = hists[0].width();
  for (const auto& x : hists)
    if (x.height() != h || x.width() != w) fail(ErrorKind::DimensionMismatch, "grid tiles must share one shape");
  cols = std::min(cols, hists.size());
  const std::size_t rows = (hists.size() + cols - 1) / cols;
  const std::size_t gw = cols * w + (cols - 1), gh = rows * h + (rows - 1);
  std::vector<std::uint8_t> img(gw * gh, kGridSeparator);
  for (std::size_t k = 0; k < rows * cols; ++k) {
    const std::size_t oy = (k / cols) * (h + 1), ox = (k % cols) * (w + 1);
    const double peak = k < hists.size() ? *std::max_element(hists[k].mass().begin(), hists[k].mass().end()) : 0.0;
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        std::uint8_t v = 0;
        if (peak > 0.0) v = static_cast<std::uint8_t>(std::lround(255.0 * hists[k].at(y, x) / peak));
        img[(oy + y) * gw + ox + x] = v;
      }
  }
  const std::string head = "P5\n" + std::to_string(gw) + " " + std::to_string(gh) + "\n255\n";
  std::vector<std::uint8_t> out(head.begin(), head.end());
  out.insert(out.end(), img.begin(), img.end());
  return out;
}

void emit_image_grid(std::span<const Histogram> hists, std::size_t cols, const std::filesystem::path& path) {
  io::write_file(path, render_image_grid(hists, cols));
}

GrayImage parse_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && (bytes[pos] == ' ' || bytes[pos] == '\n' || bytes[pos] == '\t' || bytes[pos] == '\r'))
      ++pos;
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
    return t;
  };
  auto number = [&]() -> std::size_t {
    const std::string t = token();
    if (t.empty() || t.size() > 9 || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }))
      fail(ErrorKind::MalformedHeader, "PGM header field is not a number");
    return std::stoul(t);
  };
  if (token() != "P5") fail(ErrorKind::BadMagic, "not a binary PGM (P5)");
  GrayImage img;
  img.width = number();
  img.height = number();
  if (number() != 255) fail(ErrorKind::UnsupportedDtype, "only 8-bit PGM is supported");
  if (pos >= bytes.size()) fail(ErrorKind::TruncatedFile, "PGM header has no payload");
  ++pos;  // single whitespace before the raster
  check_payload(bytes.size() - pos, img.width * img.height);
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) { return parse_pgm(io::read_file(path)); }

}  // namespace dwe
