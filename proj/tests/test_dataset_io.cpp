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

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "dwe/dataset_io.hpp"
#include "dwe/error.hpp"
#include "dwe/synthetic.hpp"
#include "oracles.hpp"

using namespace dwe;
using Bytes = std::vector<std::uint8_t>;

namespace {

void put_be32(Bytes& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(std::uint8_t(v >> s));
}

Bytes idx_fixture(std::uint32_t n, std::uint32_t h, std::uint32_t w, const Bytes& payload) {
  Bytes b;
  put_be32(b, 0x803);
  put_be32(b, n);
  put_be32(b, h);
  put_be32(b, w);
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

// Hand-built NPY 1.0 file: header padded with spaces so the payload starts on
// a 64-byte boundary.
Bytes npy_fixture(const std::string& dict, const Bytes& payload, std::uint8_t major = 1) {
  Bytes b = {0x93, 'N', 'U', 'M', 'P', 'Y', major, 0};
  const std::size_t prefix = major == 1 ? 10 : 12;
  std::string header = dict;
  while ((prefix + header.size() + 1) % 64 != 0) header += ' ';
  header += '\n';
  const std::size_t len = header.size();
  b.push_back(std::uint8_t(len));
  b.push_back(std::uint8_t(len >> 8));
  if (major != 1) {
    b.push_back(0);
    b.push_back(0);
  }
  b.insert(b.end(), header.begin(), header.end());
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

const Bytes kSixPixels = {0, 10, 0, 0, 0, 30, 255, 0, 0, 0, 0, 1};

}  // namespace

TEST_SUITE("dataset_io") {
  TEST_CASE("IDX images become normalized histograms") {
    const Dataset ds = parse_idx_bytes(idx_fixture(2, 2, 3, kSixPixels));
    CHECK(ds.manifest.format == DatasetFormat::Idx);
    CHECK(ds.manifest.image_count == 2);
    CHECK(ds.manifest.height == 2);
    CHECK(ds.manifest.width == 3);
    REQUIRE(ds.images.size() == 2);
    CHECK(ds.images[0][1] == 0.25);
    CHECK(ds.images[0][5] == 0.75);
    CHECK(ds.images[1][0] == doctest::Approx(255.0 / 256));
    CHECK(ds.images[1][5] == doctest::Approx(1.0 / 256));
    CHECK(ds.skipped == 0);
  }

  TEST_CASE("all-zero IDX images are skipped with a warning") {
    Bytes payload(3 * 4, 0);
    payload[0] = 5;
    payload[11] = 7;
    const Dataset ds = parse_idx_bytes(idx_fixture(3, 2, 2, payload));
    CHECK(ds.images.size() == 2);
    CHECK(ds.skipped == 1);
    CHECK(ds.source_index == std::vector<std::size_t>{0, 2});
    CHECK(ds.warnings.size() == 1);
    const Bytes labels = {4, 5, 6};
    CHECK(kept_labels(ds, labels) == Bytes{4, 6});
    CHECK(kind_of([&] { kept_labels(ds, Bytes{1, 2}); }) == ErrorKind::DimensionMismatch);
  }

  TEST_CASE("IDX header and size errors") {
    Bytes wrong_magic = idx_fixture(2, 2, 3, kSixPixels);
    wrong_magic[3] = 0x01;
    CHECK(kind_of([&] { parse_idx_bytes(wrong_magic); }) == ErrorKind::BadMagic);
    Bytes short_payload = idx_fixture(2, 2, 3, kSixPixels);
    short_payload.pop_back();
    CHECK(kind_of([&] { parse_idx_bytes(short_payload); }) == ErrorKind::TruncatedFile);
    Bytes long_payload = idx_fixture(2, 2, 3, kSixPixels);
    long_payload.push_back(0);
    CHECK(kind_of([&] { parse_idx_bytes(long_payload); }) == ErrorKind::MalformedHeader);
    CHECK(kind_of([&] { parse_idx_bytes(idx_fixture(0, 2, 3, {})); }) == ErrorKind::MalformedHeader);
    CHECK(kind_of([&] { parse_idx_bytes(Bytes{0, 0, 8}); }) == ErrorKind::TruncatedFile);
    CHECK(kind_of([&] { parse_idx_bytes(idx_fixture(0x10000, 0x10000, 0x10000, {})); }) == ErrorKind::TruncatedFile);
  }

  TEST_CASE("manifest checksum pins the file contents") {
    const Bytes file = idx_fixture(2, 2, 3, kSixPixels);
    const std::uint32_t crc = parse_idx_bytes(file).manifest.checksum;
    CHECK(parse_idx_bytes(file).manifest.checksum == crc);
    CHECK_NOTHROW(parse_idx_bytes(file, {}, crc));
    Bytes flipped = file;
    flipped[20] ^= 0x04;
    CHECK(kind_of([&] { parse_idx_bytes(flipped, {}, crc); }) == ErrorKind::ChecksumMismatch);
  }

  TEST_CASE("IDX labels") {
    Bytes b;
    put_be32(b, 0x801);
    put_be32(b, 3);
    b.insert(b.end(), {7, 8, 9});
    CHECK(parse_idx_labels_bytes(b) == Bytes{7, 8, 9});
    CHECK(encode_idx_labels(Bytes{7, 8, 9}) == b);
    b.pop_back();
    CHECK(kind_of([&] { parse_idx_labels_bytes(b); }) == ErrorKind::TruncatedFile);
    b[3] = 3;
    CHECK(kind_of([&] { parse_idx_labels_bytes(b); }) == ErrorKind::BadMagic);
  }

  TEST_CASE("NPY flat and three-dimensional layouts") {
    const Bytes payload = {1, 0, 0, 3, 0, 0, 0, 4};
    const Dataset flat =
        parse_npy_bytes(npy_fixture("{'descr': '|u1', 'fortran_order': False, 'shape': (2, 4), }", payload));
    CHECK(flat.manifest.format == DatasetFormat::Npy);
    CHECK(flat.manifest.height == 2);
    CHECK(flat.manifest.width == 2);
    REQUIRE(flat.images.size() == 2);
    CHECK(flat.images[0][0] == 0.25);
    CHECK(flat.images[0][3] == 0.75);
    CHECK(flat.images[1][3] == 1.0);
    const Dataset cube =
        parse_npy_bytes(npy_fixture("{'descr': '|u1', 'fortran_order': False, 'shape': (1, 2, 4), }", payload, 2));
    CHECK(cube.manifest.height == 2);
    CHECK(cube.manifest.width == 4);
    CHECK(cube.images[0][7] == 0.5);
  }

  TEST_CASE("NPY rejections are typed") {
    const Bytes payload(8, 1);
    CHECK(kind_of([&] {
            parse_npy_bytes(npy_fixture("{'descr': '<f4', 'fortran_order': False, 'shape': (2, 1), }", payload));
          }) == ErrorKind::UnsupportedDtype);
    CHECK(kind_of([&] {
            parse_npy_bytes(npy_fixture("{'descr': '|u1', 'fortran_order': True, 'shape': (2, 4), }", payload));
          }) == ErrorKind::UnsupportedOrder);
    CHECK(kind_of([&] {
            parse_npy_bytes(npy_fixture("{'descr': '|u1', 'fortran_order': False, 'shape': (2, 4), }", payload, 3));
          }) == ErrorKind::VersionUnsupported);
    CHECK(kind_of([&] {
            parse_npy_bytes(npy_fixture("{'descr': '|u1', 'fortran_order': False, 'shape': (2, 3), }", Bytes(6, 1)));
          }) == ErrorKind::MalformedHeader);
    CHECK(kind_of([&] {
            parse_npy_bytes(npy_fixture("{'descr': '|u1', 'fortran_order': False, 'shape': (4, 4), }", payload));
          }) == ErrorKind::TruncatedFile);
    CHECK(kind_of([&] {
            parse_npy_bytes(npy_fixture("{'descr': '|u1', 'fortran_order': False, 'shape': (2, 4)", payload));
          }) == ErrorKind::MalformedHeader);
    Bytes bad_magic = npy_fixture("{'descr': '|u1', 'fortran_order': False, 'shape': (2, 4), }", payload);
    bad_magic[1] = 'X';
    CHECK(kind_of([&] { parse_npy_bytes(bad_magic); }) == ErrorKind::BadMagic);
    CHECK(kind_of([&] { parse_npy_bytes(Bytes{0x93, 'N'}); }) == ErrorKind::TruncatedFile);
  }

  TEST_CASE("encoders round trip through the parsers") {
    SyntheticConfig cfg;
    cfg.count = 12;
    cfg.height = 10;
    cfg.width = 10;
    const ImageSet set = make_synthetic(cfg);
    const Dataset from_idx = parse_idx_bytes(encode_idx_images(set));
    for (bool flat : {true, false})
      for (int major : {1, 2}) {
        const Bytes npy = encode_npy(set, flat, major);
        const Dataset from_npy = parse_npy_bytes(npy);
        REQUIRE(from_npy.images.size() == from_idx.images.size());
        for (std::size_t i = 0; i < from_idx.images.size(); ++i) CHECK(from_npy.images[i] == from_idx.images[i]);
      }
    const Bytes v1 = encode_npy(set, true, 1);
    CHECK((10 + v1[8] + 256 * v1[9]) % 64 == 0);
    CHECK(v1.size() == 10 + v1[8] + 256 * v1[9] + set.pixels.size());
  }

  TEST_CASE("load_dataset sniffs the format from disk") {
    SyntheticConfig cfg;
    cfg.count = 5;
    cfg.height = 7;
    cfg.width = 7;
    const ImageSet set = make_synthetic(cfg);
    const auto dir = std::filesystem::temp_directory_path();
    const auto idx = dir / "dwe_test_sniff.idx", npy = dir / "dwe_test_sniff.npy";
    for (auto [path, bytes] : {std::pair{idx, encode_idx_images(set)}, std::pair{npy, encode_npy(set, false)}}) {
      std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    }
    CHECK(load_dataset(idx).manifest.format == DatasetFormat::Idx);
    CHECK(load_dataset(npy).manifest.format == DatasetFormat::Npy);
    CHECK(load_dataset(idx).images == load_dataset(npy).images);
    CHECK(load_dataset(npy).manifest.source == npy);
    std::filesystem::remove(idx);
    std::filesystem::remove(npy);
    CHECK(kind_of([&] { load_dataset(idx); }) == ErrorKind::IoError);
  }

  TEST_CASE("synthetic images are labelled and never empty") {
    SyntheticConfig cfg;
    cfg.count = 40;
    const ImageSet set = make_synthetic(cfg);
    CHECK(set.count() == 40);
    REQUIRE(set.labels.size() == 40);
    for (std::size_t i = 0; i < 40; ++i) {
      CHECK(set.labels[i] == i % kShapeClassCount);
      std::size_t nonzero = 0;
      for (std::uint8_t v : set.image(i)) nonzero += v > 0;
      CHECK(nonzero > 0);
      CHECK(nonzero < set.pixels_per_image());
    }
    const ImageSet again = make_synthetic(cfg);
    CHECK(again.pixels == set.pixels);
    cfg.seed = 2;
    CHECK_FALSE(make_synthetic(cfg).pixels == set.pixels);
  }

  TEST_CASE("image grid layout and scaling") {
    std::vector<Histogram> tiles = {testing::dirac(3, 4, 5), Histogram(3, 4, std::vector<double>(12, 1.0 / 12)),
                                    testing::dirac(3, 4, 0)};
    const GrayImage img = parse_pgm(render_image_grid(tiles, 2));
    CHECK(img.width == 2 * 4 + 1);
    CHECK(img.height == 2 * 3 + 1);
    CHECK(img.at(1, 1) == 255);
    CHECK(img.at(0, 0) == 0);
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 4; ++c) CHECK(img.at(r, 5 + c) == 255);
    for (std::size_t r = 0; r < img.height; ++r) CHECK(img.at(r, 4) == kGridSeparator);
    for (std::size_t c = 0; c < img.width; ++c) CHECK(img.at(3, c) == kGridSeparator);
    CHECK(img.at(4, 0) == 255);
    CHECK(img.at(4, 5) == 0);
  }

  TEST_CASE("image grid files") {
    const auto path = std::filesystem::temp_directory_path() / "dwe_test_grid.pgm";
    const Histogram tiles[] = {testing::dirac(2, 2, 3)};
    emit_image_grid(tiles, 1, path);
    const GrayImage img = read_pgm(path);
    CHECK(img.width == 2);
    CHECK(img.pixels == std::vector<std::uint8_t>{0, 0, 0, 255});
    std::filesystem::remove(path);
    const Histogram mixed[] = {testing::dirac(2, 2, 0), testing::dirac(2, 3, 0)};
    CHECK(kind_of([&] { render_image_grid(mixed, 2); }) == ErrorKind::DimensionMismatch);
    CHECK(kind_of([&] { render_image_grid(tiles, 0); }) == ErrorKind::InvalidArgument);
    const std::string p2 = "P2\n2 2\n255\n0 0 0 0\n";
    CHECK(kind_of([&] { parse_pgm(Bytes(p2.begin(), p2.end())); }) == ErrorKind::BadMagic);
  }
}
