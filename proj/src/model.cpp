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

#include "dwe/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <random>

#include "dwe/binary_io.hpp"
#include "dwe/error.hpp"
#include "dwe/kernels.hpp"

namespace dwe {
namespace {

constexpr char kCheckpointMagic[4] = {'D', 'W', 'E', '1'};
constexpr std::size_t kTensorCount = 16;

template <typename T>
using WeightSpans = std::array<std::span<const T>, kTensorCount>;

enum Slot : std::size_t {
  kEncConv1W, kEncConv1B, kEncConv2W, kEncConv2B, kEncDense1W, kEncDense1B, kEncDense2W, kEncDense2B,
  kDecDense1W, kDecDense1B, kDecDense2W, kDecDense2B, kDecConv1W, kDecConv1B, kDecConv2W, kDecConv2B,
};

std::array<std::vector<std::size_t>, kTensorCount> tensor_shapes(const ArchitectureSpec& s) {
  const std::size_t hw = s.pixels();
  return {{
      {s.enc_conv1.filters, 1, s.enc_conv1.kernel, s.enc_conv1.kernel},
      {s.enc_conv1.filters},
      {s.enc_conv2.filters, s.enc_conv1.filters, s.enc_conv2.kernel, s.enc_conv2.kernel},
      {s.enc_conv2.filters},
      {s.enc_dense1, s.enc_conv2.filters * hw},
      {s.enc_dense1},
      {s.embed_dim, s.enc_dense1},
      {s.embed_dim},
      {s.dec_dense1, s.embed_dim},
      {s.dec_dense1},
      {s.decoder_dense_out(), s.dec_dense1},
      {s.decoder_dense_out()},
      {s.dec_conv1.filters, s.dec_channels, s.dec_conv1.kernel, s.dec_conv1.kernel},
      {s.dec_conv1.filters},
      {s.dec_conv2.filters, s.dec_conv1.filters, s.dec_conv2.kernel, s.dec_conv2.kernel},
      {s.dec_conv2.filters},
  }};
}

template <typename T>
void encoder_forward(const ArchitectureSpec& s, const WeightSpans<T>& w, std::span<const T> image, std::span<T> out) {
  thread_local std::vector<T> a1, a2, a3;
  const std::size_t h = s.image_height, wd = s.image_width, hw = s.pixels();
  a1.resize(s.enc_conv1.filters * hw);
  a2.resize(s.enc_conv2.filters * hw);
  a3.resize(s.enc_dense1);
  kernels::conv2d_forward<T>({1, s.enc_conv1.filters, h, wd, s.enc_conv1.kernel}, image, w[kEncConv1W],
                             w[kEncConv1B], a1);
  kernels::relu_inplace<T>(a1);
  kernels::conv2d_forward<T>({s.enc_conv1.filters, s.enc_conv2.filters, h, wd, s.enc_conv2.kernel}, a1,
                             w[kEncConv2W], w[kEncConv2B], a2);
  kernels::relu_inplace<T>(a2);
  kernels::dense_forward<T>(s.enc_dense1, a2.size(), a2, w[kEncDense1W], w[kEncDense1B], a3);
  kernels::relu_inplace<T>(a3);
  kernels::dense_forward<T>(s.embed_dim, s.enc_dense1, a3, w[kEncDense2W], w[kEncDense2B], out);
}

template <typename T>
void decoder_forward(const ArchitectureSpec& s, const WeightSpans<T>& w, std::span<const T> emb, std::span<T> out) {
  thread_local std::vector<T> d1, d2, d3, d4;
  const std::size_t h = s.image_height, wd = s.image_width, hw = s.pixels();
  d1.resize(s.dec_dense1);
  d2.resize(s.decoder_dense_out());
  d3.resize(s.dec_conv1.filters * hw);
  d4.resize(hw);
  kernels::dense_forward<T>(s.dec_dense1, s.embed_dim, emb, w[kDecDense1W], w[kDecDense1B], d1);
  kernels::relu_inplace<T>(d1);
  kernels::dense_forward<T>(d2.size(), s.dec_dense1, d1, w[kDecDense2W], w[kDecDense2B], d2);
  kernels::conv2d_forward<T>({s.dec_channels, s.dec_conv1.filters, h, wd, s.dec_conv1.kernel}, d2, w[kDecConv1W],
                             w[kDecConv1B], d3);
  kernels::relu_inplace<T>(d3);
  kernels::conv2d_forward<T>({s.dec_conv1.filters, 1, h, wd, s.dec_conv2.kernel}, d3, w[kDecConv2W], w[kDecConv2B],
                             d4);
  kernels::softmax<T>(d4, out);
}

WeightSpans<double> spans_of(const NetworkParams& p) {
  WeightSpans<double> w;
  const auto ts = p.tensors();
  for (std::size_t i = 0; i < kTensorCount; ++i) w[i] = ts[i]->data();
  return w;
}

void check_image(const ArchitectureSpec& s, const Histogram& h) {
  if (h.height() != s.image_height || h.width() != s.image_width)
    fail(ErrorKind::ShapeMismatch, "histogram is " + std::to_string(h.height()) + "x" + std::to_string(h.width()) +
                                       ", model expects " + std::to_string(s.image_height) + "x" +
                                       std::to_string(s.image_width));
}

void check_params(const NetworkParams& p) {
  const auto shapes = tensor_shapes(p.spec);
  const auto ts = p.tensors();
  for (std::size_t i = 0; i < kTensorCount; ++i)
    if (ts[i]->shape() != shapes[i])
      fail(ErrorKind::ShapeMismatch, "parameter tensor " + std::to_string(i) + " does not match the architecture");
}

}  // namespace

void ArchitectureSpec::validate() const {
  const std::size_t sizes[] = {image_height,      image_width,      embed_dim,         enc_conv1.filters,
                               enc_conv1.kernel,  enc_conv2.filters, enc_conv2.kernel, enc_dense1,
                               dec_dense1,        dec_channels,     dec_conv1.filters, dec_conv1.kernel,
                               dec_conv2.filters, dec_conv2.kernel};
  for (std::size_t v : sizes)
    if (v == 0) fail(ErrorKind::InvalidArgument, "architecture sizes must be positive");
  for (const ConvLayer* c : {&enc_conv1, &enc_conv2, &dec_conv1, &dec_conv2})
    if (c->kernel % 2 == 0) fail(ErrorKind::InvalidArgument, "convolution kernels must be odd");
  if (dec_conv2.filters != 1) fail(ErrorKind::InvalidArgument, "the last decoder layer must have one filter");
  if (pixels() > (std::size_t{1} << 24)) fail(ErrorKind::InvalidArgument, "image too large");
}

std::vector<Tensor*> NetworkParams::tensors() {
  return {&enc_conv1_w, &enc_conv1_b, &enc_conv2_w, &enc_conv2_b, &enc_dense1_w, &enc_dense1_b,
          &enc_dense2_w, &enc_dense2_b, &dec_dense1_w, &dec_dense1_b, &dec_dense2_w, &dec_dense2_b,
          &dec_conv1_w, &dec_conv1_b, &dec_conv2_w, &dec_conv2_b};
}

std::vector<const Tensor*> NetworkParams::tensors() const {
  auto* self = const_cast<NetworkParams*>(this);
  const auto ts = self->tensors();
  return {ts.begin(), ts.end()};
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* t : tensors()) n += t->size();
  return n;
}

NetworkParams NetworkParams::zeros_like() const { return zero_params(spec); }

bool NetworkParams::all_finite() const {
  for (const Tensor* t : tensors())
    for (double v : t->data())
      if (!std::isfinite(v)) return false;
  return true;
}

NetworkParams zero_params(const ArchitectureSpec& spec) {
  spec.validate();
  NetworkParams p;
  p.spec = spec;
  const auto shapes = tensor_shapes(spec);
  const auto ts = p.tensors();
  for (std::size_t i = 0; i < kTensorCount; ++i) *ts[i] = Tensor(shapes[i]);
  return p;
}

NetworkParams init_params(const ArchitectureSpec& spec, std::uint64_t seed) {
  NetworkParams p = zero_params(spec);
  std::mt19937_64 rng(seed);
  const auto ts = p.tensors();
  // Weights sit at even slots, biases (left at zero) at odd ones.
  for (std::size_t i = 0; i < kTensorCount; i += 2) {
    Tensor& w = *ts[i];
    const std::size_t fan_in = w.size() / w.dim(0);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : w.data()) v = dist(rng);
  }
  return p;
}

double squared_distance(const EmbeddingVec& a, const EmbeddingVec& b) {
  if (a.values.size() != b.values.size()) fail(ErrorKind::ShapeMismatch, "embedding dimensions differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double t = a.values[i] - b.values[i];
    d += t * t;
  }
  return d;
}

EmbeddingVec embed(const NetworkParams& params, const Histogram& h) {
  check_image(params.spec, h);
  EmbeddingVec e;
  e.values.resize(params.spec.embed_dim);
  encoder_forward<double>(params.spec, spans_of(params), h.mass(), e.values);
  for (double v : e.values)
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteActivation, "embedding contains a non-finite value");
  return e;
}

Histogram decode(const NetworkParams& params, const EmbeddingVec& e) {
  if (e.values.size() != params.spec.embed_dim)
    fail(ErrorKind::ShapeMismatch, "embedding has " + std::to_string(e.values.size()) + " values, model expects " +
                                       std::to_string(params.spec.embed_dim));
  std::vector<double> out(params.spec.pixels());
  decoder_forward<double>(params.spec, spans_of(params), e.values, out);
  for (double v : out)
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteActivation, "reconstruction contains a non-finite value");
  return Histogram(params.spec.image_height, params.spec.image_width, std::move(out));
}

double predict_w2(const NetworkParams& params, const Histogram& a, const Histogram& b) {
  return squared_distance(embed(params, a), embed(params, b));
}

FloatEncoder::FloatEncoder(const NetworkParams& params) : spec_(params.spec) {
  check_params(params);
  for (const Tensor* t : params.tensors()) weights_.emplace_back(t->data().begin(), t->data().end());
}

void FloatEncoder::embed(const Histogram& h, std::span<float> out) const {
  check_image(spec_, h);
  if (out.size() != spec_.embed_dim) fail(ErrorKind::ShapeMismatch, "output span has the wrong length");
  thread_local std::vector<float> image;
  image.assign(h.mass().begin(), h.mass().end());
  WeightSpans<float> w;
  for (std::size_t i = 0; i < kTensorCount; ++i) w[i] = weights_[i];
  encoder_forward<float>(spec_, w, image, out);
}

BoundParams bind_params(Graph& g, const NetworkParams& params, NetworkParams& grads) {
  check_params(params);
  check_params(grads);
  const auto v = params.tensors();
  const auto d = grads.tensors();
  auto b = [&](std::size_t i) { return g.parameter(*v[i], *d[i]); };
  return BoundParams{b(0), b(1), b(2),  b(3),  b(4),  b(5),  b(6),  b(7),
                     b(8), b(9), b(10), b(11), b(12), b(13), b(14), b(15)};
}

Var encode(Graph& g, const BoundParams& p, const ArchitectureSpec& spec, Var image) {
  const auto& x = g.value(image);
  if (x.size() != spec.pixels()) fail(ErrorKind::ShapeMismatch, "encoder input has the wrong number of pixels");
  Var h = relu(g, conv2d(g, image, p.enc_conv1_w, p.enc_conv1_b));
  h = relu(g, conv2d(g, h, p.enc_conv2_w, p.enc_conv2_b));
  h = relu(g, dense(g, h, p.enc_dense1_w, p.enc_dense1_b));
  return dense(g, h, p.enc_dense2_w, p.enc_dense2_b);
}

Var decode(Graph& g, const BoundParams& p, const ArchitectureSpec& spec, Var embedding) {
  Var h = relu(g, dense(g, embedding, p.dec_dense1_w, p.dec_dense1_b));
  h = dense(g, h, p.dec_dense2_w, p.dec_dense2_b);
  h = reshape(g, h, {spec.dec_channels, spec.image_height, spec.image_width});
  h = relu(g, conv2d(g, h, p.dec_conv1_w, p.dec_conv1_b));
  h = conv2d(g, h, p.dec_conv2_w, p.dec_conv2_b);
  return softmax(g, h);
}

std::vector<std::uint8_t> serialize_checkpoint(const NetworkParams& params) {
  params.spec.validate();
  check_params(params);
  io::ByteWriter w;
  w.bytes(kCheckpointMagic, 4);
  w.put<std::uint32_t>(kCheckpointVersion);
  const auto& s = params.spec;
  for (std::size_t v : {s.image_height, s.image_width, s.embed_dim, s.enc_conv1.filters, s.enc_conv1.kernel,
                        s.enc_conv2.filters, s.enc_conv2.kernel, s.enc_dense1, s.dec_dense1, s.dec_channels,
                        s.dec_conv1.filters, s.dec_conv1.kernel, s.dec_conv2.filters, s.dec_conv2.kernel})
    w.put<std::uint32_t>(static_cast<std::uint32_t>(v));
  for (const Tensor* t : params.tensors()) w.f64s(t->data());
  w.seal();
  return w.take();
}

NetworkParams parse_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) fail(ErrorKind::ChecksumMismatch, "checkpoint truncated");
  if (std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) fail(ErrorKind::BadMagic, "not a DWE1 checkpoint");
  const auto body = io::verify_sealed(bytes);
  io::ByteReader r(body);
  r.take(4);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    fail(ErrorKind::VersionUnsupported, "checkpoint version " + std::to_string(version) + " is not supported");
  ArchitectureSpec s;
  std::size_t* fields[] = {&s.image_height, &s.image_width, &s.embed_dim, &s.enc_conv1.filters,
                           &s.enc_conv1.kernel, &s.enc_conv2.filters, &s.enc_conv2.kernel, &s.enc_dense1,
                           &s.dec_dense1, &s.dec_channels, &s.dec_conv1.filters, &s.dec_conv1.kernel,
                           &s.dec_conv2.filters, &s.dec_conv2.kernel};
  for (std::size_t* f : fields) *f = r.get<std::uint32_t>();
  try {
    s.validate();
  } catch (const Error& e) {
    fail(ErrorKind::MalformedHeader, e.what());
  }
  std::size_t expected = 0;
  for (const auto& shape : tensor_shapes(s)) expected += shape_size(shape);
  if (r.remaining() != expected * sizeof(double))
    fail(ErrorKind::MalformedHeader, "payload size does not match the architecture header");
  NetworkParams p = zero_params(s);
  for (Tensor* t : p.tensors()) r.f64s(t->data());
  return p;
}

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path) {
  io::write_file(path, serialize_checkpoint(params));
}

NetworkParams load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(io::read_file(path)); }

}  // namespace dwe
