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

#include "idkit/autograd/var.hpp"

#include <cmath>
#include <unordered_set>

#include "idkit/core/error.hpp"
#include "idkit/kernels/kernels.hpp"

namespace idkit::ad {

struct Var::Node : std::enable_shared_from_this<Var::Node> {
  Matrix value;
  Matrix grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  Matrix& grad_buffer() {
    if (grad.empty() && !value.empty()) grad = Matrix(value.rows, value.cols);
    return grad;
  }
};

using Node = Var::Node;

namespace {

void accumulate(Node& n, const Matrix& g) {
  Matrix& dst = n.grad_buffer();
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += g.data[i];
}

}  // namespace

Var Var::constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Var(std::move(n));
}

Var Var::parameter(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Var(std::move(n));
}

const Matrix& Var::value() const { return node_->value; }

const Matrix& Var::grad() const {
  if (!node_->requires_grad) throw ArgumentError("grad() on a constant");
  return node_->grad_buffer();
}

bool Var::requires_grad() const { return node_ && node_->requires_grad; }

Var make_result(Matrix value, std::vector<Var> parents, std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const Var& p : parents) {
    if (p.requires_grad()) n->requires_grad = true;
  }
  if (n->requires_grad) {
    n->parents.reserve(parents.size());
    for (Var& p : parents) n->parents.push_back(std::move(p.node_));
    n->backward = std::move(backward);
  }
  return Var(std::move(n));
}

Var matmul(const Var& a, const Var& b) {
  const Matrix& A = a.value();
  const Matrix& B = b.value();
  if (A.cols != B.rows) throw ShapeError("matmul: " + A.shape_str() + " x " + B.shape_str());
  Matrix C(A.rows, B.cols);
  kernels::gemm_nn(A.rows, B.cols, A.cols, A.data, B.data, C.data);
  return make_result(std::move(C), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const Matrix& G = self.grad;
    if (pa.requires_grad) {
      Matrix dA(pa.value.rows, pa.value.cols);
      kernels::gemm_nt(dA.rows, dA.cols, G.cols, G.data, pb.value.data, dA.data);
      accumulate(pa, dA);
    }
    if (pb.requires_grad) {
      Matrix dB(pb.value.rows, pb.value.cols);
      kernels::gemm_tn(dB.rows, dB.cols, G.rows, pa.value.data, G.data, dB.data);
      accumulate(pb, dB);
    }
  });
}

Var add(const Var& a, const Var& b) {
  Matrix out = a.value() + b.value();
  return make_result(std::move(out), {a, b}, [](Node& self) {
    for (auto& p : self.parents)
      if (p->requires_grad) accumulate(*p, self.grad);
  });
}

Var add_row(const Var& a, const Var& row) {
  const Matrix& A = a.value();
  const Matrix& R = row.value();
  if (R.rows != 1 || R.cols != A.cols) throw ShapeError("add_row: " + A.shape_str() + " + " + R.shape_str());
  Matrix out = A;
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out(i, j) += R(0, j);
  return make_result(std::move(out), {a, row}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pr = *self.parents[1];
    if (pa.requires_grad) accumulate(pa, self.grad);
    if (pr.requires_grad) {
      Matrix dr(1, self.grad.cols);
      for (int i = 0; i < self.grad.rows; ++i)
        for (int j = 0; j < self.grad.cols; ++j) dr(0, j) += self.grad(i, j);
      accumulate(pr, dr);
    }
  });
}

Var scale(const Var& a, double s) {
  Matrix out = s * a.value();
  return make_result(std::move(out), {a}, [s](Node& self) { accumulate(*self.parents[0], s * self.grad); });
}

Var gather_rows(const Var& a, std::vector<int> index) {
  const Matrix& A = a.value();
  Matrix out(static_cast<int>(index.size()), A.cols);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= A.rows) throw ShapeError("gather_rows: index out of range");
    auto src = A.row(index[i]);
    std::copy(src.begin(), src.end(), out.row(static_cast<int>(i)).begin());
  }
  return make_result(std::move(out), {a}, [index = std::move(index)](Node& self) {
    Node& pa = *self.parents[0];
    Matrix& dst = pa.grad_buffer();
    for (std::size_t i = 0; i < index.size(); ++i) {
      auto g = self.grad.row(static_cast<int>(i));
      auto d = dst.row(index[i]);
      for (std::size_t c = 0; c < g.size(); ++c) d[c] += g[c];
    }
  });
}

Var layer_norm_rows(const Var& a, double eps) {
  const Matrix& A = a.value();
  Matrix out(A.rows, A.cols);
  std::vector<double> inv_std(A.rows);
  for (int i = 0; i < A.rows; ++i) {
    double mean = 0.0;
    for (double v : A.row(i)) mean += v;
    mean /= A.cols;
    double var = 0.0;
    for (double v : A.row(i)) var += (v - mean) * (v - mean);
    var /= A.cols;
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < A.cols; ++j) out(i, j) = (A(i, j) - mean) * inv_std[i];
  }
  Matrix normalized = out;
  return make_result(std::move(out), {a},
                     [normalized = std::move(normalized), inv_std = std::move(inv_std)](Node& self) {
                       const Matrix& G = self.grad;
                       const int n = G.cols;
                       Matrix dA(G.rows, n);
                       for (int i = 0; i < G.rows; ++i) {
                         double gmean = 0.0, gxmean = 0.0;
                         for (int j = 0; j < n; ++j) {
                           gmean += G(i, j);
                           gxmean += G(i, j) * normalized(i, j);
                         }
                         gmean /= n;
                         gxmean /= n;
                         for (int j = 0; j < n; ++j)
                           dA(i, j) = inv_std[i] * (G(i, j) - gmean - normalized(i, j) * gxmean);
                       }
                       accumulate(*self.parents[0], dA);
                     });
}

Var attention(const Var& q, const Var& k, const Var& v, int groups, int heads) {
  const Matrix& Q = q.value();
  const Matrix& K = k.value();
  const Matrix& V = v.value();
  if (groups < 1 || heads < 1) throw ShapeError("attention: groups and heads must be positive");
  if (Q.cols != K.cols) throw ShapeError("attention: query width " + std::to_string(Q.cols) + " != key width " +
                                         std::to_string(K.cols));
  if (K.rows != V.rows) throw ShapeError("attention: key rows " + std::to_string(K.rows) + " != value rows " +
                                         std::to_string(V.rows));
  if (Q.rows % groups || K.rows % groups) throw ShapeError("attention: rows not divisible by groups");
  if (Q.cols % heads || V.cols % heads) throw ShapeError("attention: widths not divisible by heads");

  kernels::AttentionShape s;
  s.groups = groups;
  s.lq = Q.rows / groups;
  s.lk = K.rows / groups;
  s.heads = heads;
  s.dk = Q.cols / heads;
  s.dv = V.cols / heads;
  s.scale = 1.0 / std::sqrt(static_cast<double>(s.dk));
  if (s.lk == 0) throw ShapeError("attention: empty key set");

  const bool needs_grad = q.requires_grad() || k.requires_grad() || v.requires_grad();
  Matrix out(Q.rows, V.cols);
  std::vector<double> probs(needs_grad ? s.prob_count() : 0);
  kernels::attention_forward(s, Q.data, K.data, V.data, out.data, probs);

  return make_result(std::move(out), {q, k, v}, [s, probs = std::move(probs)](Node& self) {
    Node& pq = *self.parents[0];
    Node& pk = *self.parents[1];
    Node& pv = *self.parents[2];
    Matrix dq(pq.value.rows, pq.value.cols), dk(pk.value.rows, pk.value.cols), dv(pv.value.rows, pv.value.cols);
    kernels::attention_backward(s, pq.value.data, pk.value.data, pv.value.data, probs, self.grad.data, dq.data,
                                dk.data, dv.data);
    if (pq.requires_grad) accumulate(pq, dq);
    if (pk.requires_grad) accumulate(pk, dk);
    if (pv.requires_grad) accumulate(pv, dv);
  });
}

Var mse(const Var& pred, const Matrix& target) {
  const Matrix& P = pred.value();
  if (!P.same_shape(target)) throw ShapeError("mse: " + P.shape_str() + " vs " + target.shape_str());
  if (P.empty()) throw ShapeError("mse: empty operand");
  double acc = 0.0;
  for (std::size_t i = 0; i < P.data.size(); ++i) {
    const double d = P.data[i] - target.data[i];
    acc += d * d;
  }
  const double n = static_cast<double>(P.data.size());
  Matrix out(1, 1, acc / n);
  return make_result(std::move(out), {pred}, [target, n](Node& self) {
    Node& pp = *self.parents[0];
    const double g = self.grad(0, 0);
    Matrix d(pp.value.rows, pp.value.cols);
    for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] = g * 2.0 * (pp.value.data[i] - target.data[i]) / n;
    accumulate(pp, d);
  });
}

Var sum_squares(const Var& a) {
  double acc = 0.0;
  for (double v : a.value().data) acc += v * v;
  return make_result(Matrix(1, 1, acc), {a}, [](Node& self) {
    Node& pa = *self.parents[0];
    accumulate(pa, (2.0 * self.grad(0, 0)) * pa.value);
  });
}

Var mean_scalars(std::span<const Var> xs) {
  if (xs.empty()) throw ArgumentError("mean_scalars: empty input");
  double acc = 0.0;
  for (const Var& x : xs) {
    if (x.rows() != 1 || x.cols() != 1) throw ShapeError("mean_scalars: non-scalar input");
    acc += x.value()(0, 0);
  }
  const double n = static_cast<double>(xs.size());
  return make_result(Matrix(1, 1, acc / n), std::vector<Var>(xs.begin(), xs.end()), [n](Node& self) {
    Matrix g(1, 1, self.grad(0, 0) / n);
    for (auto& p : self.parents)
      if (p->requires_grad) accumulate(*p, g);
  });
}

namespace {

// Iterative post-order DFS over nodes that require grad: a topological order.
std::vector<Node*> topo_order(Node* root) {
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
  seen.insert(root);
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  return order;
}

}  // namespace

void backward(const Var& root) {
  if (!root.node_) throw ArgumentError("backward on an empty Var");
  if (root.rows() != 1 || root.cols() != 1) throw ShapeError("backward root must be 1x1");
  if (!root.requires_grad()) return;

  const std::vector<Node*> order = topo_order(root.node_.get());
  root.node_->grad_buffer()(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

std::vector<Var> trainable_leaves(const Var& root) {
  std::vector<Var> out;
  if (!root.requires_grad()) return out;
  for (Node* n : topo_order(root.node_.get()))
    if (n->parents.empty()) out.push_back(Var(n->shared_from_this()));
  return out;
}

}  // namespace idkit::ad
