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

// Minimal reverse-mode automatic differentiation: a tape of coarse tensor
// operations with exactly the layers and losses the embedding network uses.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dwe {

/// Dense row-major tensor of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  bool requires_grad() const noexcept { return requires_grad_; }
  void set_requires_grad(bool on) noexcept { requires_grad_ = on; }

  void fill(double v);
  /// Same shape, all zeros.
  Tensor zeros_like() const { return Tensor(shape_); }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
  bool requires_grad_ = false;
};

std::size_t shape_size(std::span<const std::size_t> shape);

/// Handle to a node of a Graph.
struct Var {
  std::size_t id;
};

enum class OpKind {
  Leaf,
  Parameter,
  Conv2d,
  Dense,
  Relu,
  Softmax,
  Reshape,
  LossDistance,
  LossKl,
  LossSparsity,
  WeightedSum,
};

/// Append-only tape. Nodes are stored in creation order, which is a
/// topological order, so backward() is one reverse sweep.
class Graph {
 public:
  /// Leaf owning its value. Its gradient is kept when requires_grad is set.
  Var input(Tensor value);
  /// Leaf aliasing an external tensor; backward() accumulates into `grad`.
  /// Both must outlive the graph.
  Var parameter(const Tensor& value, Tensor& grad);

  const Tensor& value(Var v) const;
  /// Gradient of the last backward() root with respect to `v`; zeros when
  /// no gradient reached it.
  const Tensor& grad(Var v);

  /// Seeds d(root)/d(root) = 1 and propagates. `root` must hold one element.
  void backward(Var root);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  friend Var conv2d(Graph&, Var, Var, Var);
  friend Var dense(Graph&, Var, Var, Var);
  friend Var relu(Graph&, Var);
  friend Var softmax(Graph&, Var);
  friend Var reshape(Graph&, Var, std::vector<std::size_t>);
  friend Var loss_distance(Graph&, Var, Var, double);
  friend Var loss_kl(Graph&, Var, Var);
  friend Var loss_sparsity(Graph&, Var, double);
  friend Var weighted_sum(Graph&, std::span<const Var>, std::span<const double>);

  struct Node {
    OpKind kind = OpKind::Leaf;
    std::vector<std::size_t> inputs;
    Tensor value;
    const Tensor* external = nullptr;
    Tensor* external_grad = nullptr;
    Tensor grad;
    bool needs_grad = false;
    double arg = 0.0;            // y for LossDistance, delta for LossSparsity
    std::vector<double> weights;  // WeightedSum coefficients
  };

  Var push(Node node);
  Node& node(Var v) { return nodes_.at(v.id); }
  const Node& node(Var v) const { return nodes_.at(v.id); }
  std::span<double> grad_buffer(std::size_t id);
  void backward_node(std::size_t id);

  std::vector<Node> nodes_;
};

/// Same-padded, stride-1 cross-correlation.
/// input [C_in, H, W], kernels [C_out, C_in, k, k], bias [C_out] -> [C_out, H, W].
Var conv2d(Graph& g, Var input, Var kernels, Var bias);
/// weight [m, n], bias [m]; the input may have any shape with n elements.
Var dense(Graph& g, Var input, Var weight, Var bias);
/// Subgradient 0 at 0.
Var relu(Graph& g, Var x);
/// Softmax over all elements; the output is a probability vector.
Var softmax(Graph& g, Var x);
Var reshape(Graph& g, Var x, std::vector<std::size_t> shape);
/// (||e1 - e2||^2 - y)^2
Var loss_distance(Graph& g, Var e1, Var e2, double y);
/// KL(target || recon) = sum target * log(target / recon), with 0 log 0 = 0.
/// Gradient flows to recon only.
Var loss_kl(Graph& g, Var target, Var recon);

/// Values of the loss_kl and loss_sparsity ops without a graph.
double kl_divergence(std::span<const double> target, std::span<const double> recon);
double sparsity_penalty(std::span<const double> recon, double delta = 1e-8);

/// sum sqrt(recon + delta)
Var loss_sparsity(Graph& g, Var recon, double delta = 1e-8);
/// sum_k weights[k] * terms[k] over scalar terms.
Var weighted_sum(Graph& g, std::span<const Var> terms, std::span<const double> weights);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update. `state` is sized on first use; shapes of
/// params and grads must agree (ShapeMismatch otherwise).
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace dwe
