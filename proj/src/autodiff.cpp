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

#include "dwe/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dwe/error.hpp"
#include "dwe/kernels.hpp"

namespace dwe {
namespace {

std::string shape_str(const std::vector<std::size_t>& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

void expect(bool ok, const char* op, const std::string& detail) {
  if (!ok) fail(ErrorKind::ShapeMismatch, std::string(op) + ": " + detail);
}

}  // namespace

std::size_t shape_size(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_))
    fail(ErrorKind::ShapeMismatch, "tensor data length does not match shape " + shape_str(shape_));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Var Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Graph::input(Tensor value) {
  Node n;
  n.kind = OpKind::Leaf;
  n.needs_grad = value.requires_grad();
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::parameter(const Tensor& value, Tensor& grad) {
  expect(value.shape() == grad.shape(), "parameter", "gradient buffer shape differs from value");
  Node n;
  n.kind = OpKind::Parameter;
  n.external = &value;
  n.external_grad = &grad;
  n.needs_grad = true;
  return push(std::move(n));
}

const Tensor& Graph::value(Var v) const {
  const Node& n = node(v);
  return n.external ? *n.external : n.value;
}

const Tensor& Graph::grad(Var v) {
  Node& n = node(v);
  if (n.external_grad) return *n.external_grad;
  if (n.grad.size() != value(v).size()) n.grad = value(v).zeros_like();
  return n.grad;
}

std::span<double> Graph::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.external_grad) return n.external_grad->data();
  if (n.grad.size() == 0) n.grad = (n.external ? *n.external : n.value).zeros_like();
  return n.grad.data();
}

void Graph::backward(Var root) {
  if (value(root).size() != 1) fail(ErrorKind::ShapeMismatch, "backward root must be a scalar");
  for (auto& n : nodes_)
    if (!n.external_grad) n.grad = Tensor();
  grad_buffer(root.id)[0] += 1.0;
  for (std::size_t id = root.id + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    if (!n.needs_grad || n.kind == OpKind::Leaf || n.kind == OpKind::Parameter) continue;
    if (n.grad.size() == 0) continue;  // nothing flowed into this node
    backward_node(id);
  }
}

void Graph::backward_node(std::size_t id) {
  // Copy what we need first: grad_buffer() may reallocate other nodes' grads
  // but never resizes nodes_ itself, so references into nodes_ stay valid.
  const Node& n = nodes_[id];
  const std::span<const double> gy = n.grad.data();
  auto needs = [&](std::size_t k) { return nodes_[n.inputs[k]].needs_grad; };
  auto in_value = [&](std::size_t k) -> const Tensor& { return value(Var{n.inputs[k]}); };

  switch (n.kind) {
    case OpKind::Conv2d: {
      const Tensor& x = in_value(0);
      const Tensor& w = in_value(1);
      const kernels::ConvShape s{x.dim(0), w.dim(0), x.dim(1), x.dim(2), w.dim(2)};
      std::span<double> gx, gw, gb;
      if (needs(0)) gx = grad_buffer(n.inputs[0]);
      if (needs(1)) gw = grad_buffer(n.inputs[1]);
      if (needs(2)) gb = grad_buffer(n.inputs[2]);
      kernels::conv2d_backward<double>(s, x.data(), w.data(), gy, gx, gw, gb);
      break;
    }
    case OpKind::Dense: {
      const Tensor& x = in_value(0);
      const Tensor& w = in_value(1);
      std::span<double> gx, gw, gb;
      if (needs(0)) gx = grad_buffer(n.inputs[0]);
      if (needs(1)) gw = grad_buffer(n.inputs[1]);
      if (needs(2)) gb = grad_buffer(n.inputs[2]);
      kernels::dense_backward<double>(w.dim(0), w.dim(1), x.data(), w.data(), gy, gx, gw, gb);
      break;
    }
    case OpKind::Relu: {
      if (!needs(0)) break;
      const auto x = in_value(0).data();
      auto gx = grad_buffer(n.inputs[0]);
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > 0.0) gx[i] += gy[i];
      break;
    }
    case OpKind::Softmax: {
      if (!needs(0)) break;
      const auto y = n.value.data();
      double dot = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) dot += gy[i] * y[i];
      auto gx = grad_buffer(n.inputs[0]);
      for (std::size_t i = 0; i < y.size(); ++i) gx[i] += y[i] * (gy[i] - dot);
      break;
    }
    case OpKind::Reshape: {
      if (!needs(0)) break;
      auto gx = grad_buffer(n.inputs[0]);
      for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
      break;
    }
    case OpKind::LossDistance: {
      const auto a = in_value(0).data();
      const auto b = in_value(1).data();
      double d = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
      const double scale = gy[0] * 2.0 * (d - n.arg) * 2.0;
      if (needs(0)) {
        auto ga = grad_buffer(n.inputs[0]);
        for (std::size_t i = 0; i < a.size(); ++i) ga[i] += scale * (a[i] - b[i]);
      }
      if (needs(1)) {
        auto gb = grad_buffer(n.inputs[1]);
        for (std::size_t i = 0; i < a.size(); ++i) gb[i] -= scale * (a[i] - b[i]);
      }
      break;
    }
    case OpKind::LossKl: {
      if (!needs(1)) break;
      const auto t = in_value(0).data();
      const auto r = in_value(1).data();
      auto gr = grad_buffer(n.inputs[1]);
      for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] > 0.0) gr[i] -= gy[0] * t[i] / r[i];
      break;
    }
    case OpKind::LossSparsity: {
      if (!needs(0)) break;
      const auto r = in_value(0).data();
      auto gr = grad_buffer(n.inputs[0]);
      for (std::size_t i = 0; i < r.size(); ++i) gr[i] += gy[0] * 0.5 / std::sqrt(r[i] + n.arg);
      break;
    }
    case OpKind::WeightedSum: {
      for (std::size_t k = 0; k < n.inputs.size(); ++k)
        if (needs(k)) grad_buffer(n.inputs[k])[0] += gy[0] * n.weights[k];
      break;
    }
    case OpKind::Leaf:
    case OpKind::Parameter:
      break;
  }
}

Var conv2d(Graph& g, Var input, Var kernels_var, Var bias) {
  const Tensor& x = g.value(input);
  const Tensor& w = g.value(kernels_var);
  const Tensor& b = g.value(bias);
  expect(x.shape().size() == 3, "conv2d", "input must be [C,H,W], got " + shape_str(x.shape()));
  expect(w.shape().size() == 4, "conv2d", "kernels must be [C_out,C_in,k,k], got " + shape_str(w.shape()));
  expect(w.dim(1) == x.dim(0), "conv2d", "kernel input channels differ from input channels");
  expect(w.dim(2) == w.dim(3) && w.dim(2) % 2 == 1, "conv2d", "kernel must be square with odd size");
  expect(b.size() == w.dim(0), "conv2d", "bias length differs from output channels");
  const kernels::ConvShape s{x.dim(0), w.dim(0), x.dim(1), x.dim(2), w.dim(2)};
  Graph::Node n;
  n.kind = OpKind::Conv2d;
  n.inputs = {input.id, kernels_var.id, bias.id};
  n.value = Tensor({s.out_channels, s.height, s.width});
  kernels::conv2d_forward<double>(s, x.data(), w.data(), b.data(), n.value.data());
  n.needs_grad = g.node(input).needs_grad || g.node(kernels_var).needs_grad || g.node(bias).needs_grad;
  return g.push(std::move(n));
}

Var dense(Graph& g, Var input, Var weight, Var bias) {
  const Tensor& x = g.value(input);
  const Tensor& w = g.value(weight);
  const Tensor& b = g.value(bias);
  expect(w.shape().size() == 2, "dense", "weight must be [m,n], got " + shape_str(w.shape()));
  expect(x.size() == w.dim(1), "dense", "input has " + std::to_string(x.size()) + " elements, weight expects " +
                                            std::to_string(w.dim(1)));
  expect(b.size() == w.dim(0), "dense", "bias length differs from output size");
  Graph::Node n;
  n.kind = OpKind::Dense;
  n.inputs = {input.id, weight.id, bias.id};
  n.value = Tensor({w.dim(0)});
  kernels::dense_forward<double>(w.dim(0), w.dim(1), x.data(), w.data(), b.data(), n.value.data());
  n.needs_grad = g.node(input).needs_grad || g.node(weight).needs_grad || g.node(bias).needs_grad;
  return g.push(std::move(n));
}

Var relu(Graph& g, Var x) {
  Graph::Node n;
  n.kind = OpKind::Relu;
  n.inputs = {x.id};
  n.value = g.value(x);
  n.value.set_requires_grad(false);
  kernels::relu_inplace<double>(n.value.data());
  n.needs_grad = g.node(x).needs_grad;
  return g.push(std::move(n));
}

Var softmax(Graph& g, Var x) {
  const auto in = g.value(x).data();
  Graph::Node n;
  n.kind = OpKind::Softmax;
  n.inputs = {x.id};
  n.value = Tensor(g.value(x).shape());
  kernels::softmax<double>(in, n.value.data());
  n.needs_grad = g.node(x).needs_grad;
  return g.push(std::move(n));
}

Var reshape(Graph& g, Var x, std::vector<std::size_t> shape) {
  const Tensor& v = g.value(x);
  expect(shape_size(shape) == v.size(), "reshape", shape_str(v.shape()) + " -> " + shape_str(shape));
  Graph::Node n;
  n.kind = OpKind::Reshape;
  n.inputs = {x.id};
  n.value = Tensor(std::move(shape), std::vector<double>(v.data().begin(), v.data().end()));
  n.needs_grad = g.node(x).needs_grad;
  return g.push(std::move(n));
}

Var loss_distance(Graph& g, Var e1, Var e2, double y) {
  const auto a = g.value(e1).data();
  const auto b = g.value(e2).data();
  expect(a.size() == b.size(), "loss_distance", "embedding sizes differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  Graph::Node n;
  n.kind = OpKind::LossDistance;
  n.inputs = {e1.id, e2.id};
  n.arg = y;
  n.value = Tensor::scalar((d - y) * (d - y));
  n.needs_grad = g.node(e1).needs_grad || g.node(e2).needs_grad;
  return g.push(std::move(n));
}

double kl_divergence(std::span<const double> target, std::span<const double> recon) {
  double kl = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i)
    if (target[i] > 0.0) kl += target[i] * std::log(target[i] / recon[i]);
  return kl;
}

double sparsity_penalty(std::span<const double> recon, double delta) {
  double s = 0.0;
  for (double v : recon) s += std::sqrt(v + delta);
  return s;
}

Var loss_kl(Graph& g, Var target, Var recon) {
  const auto t = g.value(target).data();
  const auto r = g.value(recon).data();
  expect(t.size() == r.size(), "loss_kl", "target and reconstruction sizes differ");
  const double kl = kl_divergence(t, r);
  Graph::Node n;
  n.kind = OpKind::LossKl;
  n.inputs = {target.id, recon.id};
  n.value = Tensor::scalar(kl);
  n.needs_grad = g.node(recon).needs_grad;
  return g.push(std::move(n));
}

Var loss_sparsity(Graph& g, Var recon, double delta) {
  const auto r = g.value(recon).data();
  const double s = sparsity_penalty(r, delta);
  Graph::Node n;
  n.kind = OpKind::LossSparsity;
  n.inputs = {recon.id};
  n.arg = delta;
  n.value = Tensor::scalar(s);
  n.needs_grad = g.node(recon).needs_grad;
  return g.push(std::move(n));
}

Var weighted_sum(Graph& g, std::span<const Var> terms, std::span<const double> weights) {
  expect(terms.size() == weights.size() && !terms.empty(), "weighted_sum", "one weight per term required");
  Graph::Node n;
  n.kind = OpKind::WeightedSum;
  double total = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    expect(g.value(terms[k]).size() == 1, "weighted_sum", "terms must be scalars");
    n.inputs.push_back(terms[k].id);
    total += weights[k] * g.value(terms[k])[0];
    n.needs_grad = n.needs_grad || g.node(terms[k]).needs_grad;
  }
  n.weights.assign(weights.begin(), weights.end());
  n.value = Tensor::scalar(total);
  return g.push(std::move(n));
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state,
               const AdamConfig& cfg) {
  if (params.size() != grads.size()) fail(ErrorKind::ShapeMismatch, "adam_step: one gradient per parameter required");
  if (state.first_moment.empty()) {
    for (const Tensor* p : params) {
      state.first_moment.push_back(p->zeros_like());
      state.second_moment.push_back(p->zeros_like());
    }
  }
  if (state.first_moment.size() != params.size())
    fail(ErrorKind::ShapeMismatch, "adam_step: optimizer state belongs to a different parameter set");
  for (std::size_t k = 0; k < params.size(); ++k)
    if (params[k]->shape() != grads[k]->shape() || params[k]->shape() != state.first_moment[k].shape())
      fail(ErrorKind::ShapeMismatch, "adam_step: shape mismatch at parameter " + std::to_string(k));

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k]->data();
    const auto gr = grads[k]->data();
    auto m = state.first_moment[k].data();
    auto v = state.second_moment[k].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gr[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gr[i] * gr[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace dwe
