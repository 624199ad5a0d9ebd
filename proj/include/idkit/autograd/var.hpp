// Copyright 2026 The id-kit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal reverse-mode differentiation over dense matrices. Only nodes that
// (transitively) depend on a parameter record a backward closure; constants
// never allocate gradient storage.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "idkit/core/matrix.hpp"

namespace idkit::ad {

class Var {
 public:
  Var() = default;

  static Var constant(Matrix value);
  static Var parameter(Matrix value);

  const Matrix& value() const;
  // Accumulated gradient; zero-filled if backward never reached this node.
  const Matrix& grad() const;
  bool requires_grad() const;
  explicit operator bool() const { return node_ != nullptr; }
  bool same_node(const Var& other) const { return node_ == other.node_; }

  int rows() const { return value().rows; }
  int cols() const { return value().cols; }

  struct Node;

 private:
  explicit Var(std::shared_ptr<Node> n) : node_(std::move(n)) {}
  std::shared_ptr<Node> node_;

  friend Var make_result(Matrix value, std::vector<Var> parents, std::function<void(Node&)> backward);
  friend void backward(const Var& root);
  friend std::vector<Var> trainable_leaves(const Var& root);
};

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
// a + ones(rows, 1) * row
Var add_row(const Var& a, const Var& row);
Var scale(const Var& a, double s);
// out[i] = a[index[i]]
Var gather_rows(const Var& a, std::vector<int> index);
// Per-row zero-mean unit-variance normalization, no affine part.
Var layer_norm_rows(const Var& a, double eps = 1e-5);
// softmax(Q K^T / sqrt(d_head)) V for `groups` independent row blocks and
// `heads` column blocks.
Var attention(const Var& q, const Var& k, const Var& v, int groups, int heads);
// 1x1: mean over entries of (pred - target)^2
Var mse(const Var& pred, const Matrix& target);
// 1x1: sum of squares
Var sum_squares(const Var& a);
// 1x1: arithmetic mean of 1x1 inputs
Var mean_scalars(std::span<const Var> xs);

// Seeds d(root)/d(root) = 1 and propagates to every reachable parameter.
void backward(const Var& root);

// Parameters reachable from `root`. Constants never appear in a graph, so
// this is exactly the set of tensors that backward() can update.
std::vector<Var> trainable_leaves(const Var& root);

}  // namespace idkit::ad
