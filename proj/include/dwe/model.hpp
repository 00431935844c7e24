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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dwe/autodiff.hpp"
#include "dwe/histogram.hpp"

namespace dwe {

struct ConvLayer {
  std::size_t filters;
  std::size_t kernel;

  friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

/// Layer sizes of the encoder and decoder. Defaults give the 28x28 network:
/// conv(20, 3x3) -> conv(5, 5x5) -> dense(100) -> dense(50) for the encoder,
/// dense(100) -> dense(5*H*W) -> reshape -> conv(20, 5x5) -> conv(1, 3x3)
/// -> softmax for the decoder.
struct ArchitectureSpec {
  std::size_t image_height = 28;
  std::size_t image_width = 28;
  std::size_t embed_dim = 50;
  ConvLayer enc_conv1{20, 3};
  ConvLayer enc_conv2{5, 5};
  std::size_t enc_dense1 = 100;
  std::size_t dec_dense1 = 100;
  std::size_t dec_channels = 5;
  ConvLayer dec_conv1{20, 5};
  ConvLayer dec_conv2{1, 3};

  std::size_t pixels() const { return image_height * image_width; }
  std::size_t decoder_dense_out() const { return dec_channels * pixels(); }

  /// Throws InvalidArgument on zero sizes, even kernels, or a multi-filter
  /// final decoder layer.
  void validate() const;

  friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;
};

/// All weights of the encoder and decoder, in declaration order.
struct NetworkParams {
  ArchitectureSpec spec;
  Tensor enc_conv1_w, enc_conv1_b;
  Tensor enc_conv2_w, enc_conv2_b;
  Tensor enc_dense1_w, enc_dense1_b;
  Tensor enc_dense2_w, enc_dense2_b;
  Tensor dec_dense1_w, dec_dense1_b;
  Tensor dec_dense2_w, dec_dense2_b;
  Tensor dec_conv1_w, dec_conv1_b;
  Tensor dec_conv2_w, dec_conv2_b;

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  std::size_t parameter_count() const;
  /// Same spec and shapes, all zeros: a gradient accumulator.
  NetworkParams zeros_like() const;
  bool all_finite() const;

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

/// Shapes for `spec`, He-uniform weights drawn from `seed`, zero biases.
NetworkParams init_params(const ArchitectureSpec& spec, std::uint64_t seed);
/// Shapes for `spec`, every value zero.
NetworkParams zero_params(const ArchitectureSpec& spec);

struct EmbeddingVec {
  std::vector<double> values;

  friend bool operator==(const EmbeddingVec&, const EmbeddingVec&) = default;
};

/// Encoder forward pass. Throws ShapeMismatch or NonFiniteActivation.
EmbeddingVec embed(const NetworkParams& params, const Histogram& h);
/// Decoder forward pass; the result is a softmax, so strictly positive.
Histogram decode(const NetworkParams& params, const EmbeddingVec& e);
/// ||embed(a) - embed(b)||^2
double predict_w2(const NetworkParams& params, const Histogram& a, const Histogram& b);
double squared_distance(const EmbeddingVec& a, const EmbeddingVec& b);

/// Single-precision copy of the encoder, for throughput measurements.
class FloatEncoder {
 public:
  explicit FloatEncoder(const NetworkParams& params);
  std::size_t embed_dim() const { return spec_.embed_dim; }
  /// Writes embed_dim floats to `out`.
  void embed(const Histogram& h, std::span<float> out) const;

 private:
  ArchitectureSpec spec_;
  std::vector<std::vector<float>> weights_;
};

/// Graph handles for every parameter tensor, bound to gradient buffers.
struct BoundParams {
  Var enc_conv1_w, enc_conv1_b, enc_conv2_w, enc_conv2_b;
  Var enc_dense1_w, enc_dense1_b, enc_dense2_w, enc_dense2_b;
  Var dec_dense1_w, dec_dense1_b, dec_dense2_w, dec_dense2_b;
  Var dec_conv1_w, dec_conv1_b, dec_conv2_w, dec_conv2_b;
};

BoundParams bind_params(Graph& g, const NetworkParams& params, NetworkParams& grads);
/// Encoder on the tape; `image` is [1, H, W].
Var encode(Graph& g, const BoundParams& p, const ArchitectureSpec& spec, Var image);
/// Decoder on the tape; returns the softmax output [1, H, W].
Var decode(Graph& g, const BoundParams& p, const ArchitectureSpec& spec, Var embedding);

/// Little-endian binary: "DWE1", format version, architecture header, raw
/// float64 tensors in declaration order, trailing CRC-32 of everything before.
void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path);
/// Throws IoError, BadMagic, ChecksumMismatch, or VersionUnsupported.
NetworkParams load_checkpoint(const std::filesystem::path& path);
NetworkParams parse_checkpoint(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_checkpoint(const NetworkParams& params);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace dwe
