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

#include <cstdint>
#include <functional>
#include <vector>

#include "dwe/dataset_io.hpp"
#include "dwe/model.hpp"
#include "dwe/synthetic.hpp"
#include "dwe/training.hpp"
#include "mutants.hpp"

using namespace dwe;
using testing::Bytes;

namespace {

void check_corpus(const Bytes& base, std::size_t header_len, std::uint64_t seed,
                  const std::function<void(const Bytes&)>& parse) {
  REQUIRE_NOTHROW(parse(base));
  const auto mutants = testing::make_mutants(base, 100, seed, header_len);
  for (const Bytes& m : mutants) CHECK(m != base);
  const testing::CorpusReport r = testing::run_corpus(mutants, parse);
  for (const auto& note : r.notes) INFO(note);
  CHECK(r.total == 100);
  CHECK(r.accepted == 0);
  CHECK(r.untyped == 0);
  CHECK(r.all_rejected());
}

ImageSet sample_images() {
  SyntheticConfig cfg;
  cfg.count = 6;
  cfg.height = 12;
  cfg.width = 12;
  return make_synthetic(cfg);
}

}  // namespace

TEST_SUITE("fuzz") {
  TEST_CASE("IDX corpus") {
    const Bytes base = encode_idx_images(sample_images());
    const std::uint32_t crc = parse_idx_bytes(base).manifest.checksum;
    check_corpus(base, 16, 1, [crc](const Bytes& b) { parse_idx_bytes(b, {}, crc); });
  }

  TEST_CASE("NPY corpus") {
    for (int major : {1, 2}) {
      const Bytes base = encode_npy(sample_images(), major == 1, major);
      const std::uint32_t crc = parse_npy_bytes(base).manifest.checksum;
      check_corpus(base, 64, 2 + major, [crc](const Bytes& b) { parse_npy_bytes(b, {}, crc); });
    }
  }

  TEST_CASE("NPY header corpus without a manifest") {
    // Header-only damage must be caught structurally, with no checksum to lean on.
    const Bytes base = encode_npy(sample_images());
    const auto mutants = testing::make_mutants(base, 200, 9, 64);
    std::vector<Bytes> header_only;
    for (const Bytes& m : mutants)
      if (m.size() < base.size()) header_only.push_back(m);
    const testing::CorpusReport r =
        testing::run_corpus(header_only, [](const Bytes& b) { parse_npy_bytes(b); });
    CHECK(r.untyped == 0);
    CHECK(r.accepted == 0);
  }

  TEST_CASE("WPR1 corpus") {
    PairFile f{0x12345678, {}};
    for (std::uint32_t i = 0; i < 20; ++i) f.pairs.push_back({i, (i * 7) % 20, 0.5 * i});
    check_corpus(serialize_pairs(f), 16, 4, [](const Bytes& b) { parse_pairs(b); });
  }

  TEST_CASE("DWE1 corpus") {
    ArchitectureSpec s;
    s.image_height = 8;
    s.image_width = 8;
    s.embed_dim = 4;
    s.enc_conv1 = {2, 3};
    s.enc_conv2 = {2, 3};
    s.enc_dense1 = 6;
    s.dec_dense1 = 6;
    s.dec_channels = 2;
    s.dec_conv1 = {2, 3};
    check_corpus(serialize_checkpoint(init_params(s, 1)), 64, 5, [](const Bytes& b) { parse_checkpoint(b); });
  }
}
