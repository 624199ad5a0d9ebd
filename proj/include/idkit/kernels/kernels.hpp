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

// Dense kernels used by the autograd ops. Every kernel exists twice: a plain
// serial reference in `serial::` and an OpenMP version in `omp::`. Both
// accumulate each output element in the same order, so results are bitwise
// identical; tests hold them to that.

#include <cstddef>
#include <span>

namespace idkit::kernels {

// Layout of a grouped multi-head attention call. Q is [groups*lq x heads*dk],
// K is [groups*lk x heads*dk], V is [groups*lk x heads*dv]; group g owns a
// contiguous block of rows in each operand.
struct AttentionShape {
  int groups = 1;
  int lq = 0;
  int lk = 0;
  int heads = 1;
  int dk = 0;  // per head
  int dv = 0;  // per head
  double scale = 1.0;

  std::size_t prob_count() const {
    return static_cast<std::size_t>(groups) * heads * lq * lk;
  }
};

#define IDKIT_KERNEL_DECLS                                                                                  \
  /* C[m x n] = A[m x k] * B[k x n] */                                                                      \
  void gemm_nn(int m, int n, int k, std::span<const double> a, std::span<const double> b,                   \
               std::span<double> c);                                                                        \
  /* C[m x n] = A[k x m]^T * B[k x n] */                                                                    \
  void gemm_tn(int m, int n, int k, std::span<const double> a, std::span<const double> b,                   \
               std::span<double> c);                                                                        \
  /* C[m x n] = A[m x k] * B[n x k]^T */                                                                    \
  void gemm_nt(int m, int n, int k, std::span<const double> a, std::span<const double> b,                   \
               std::span<double> c);                                                                        \
  /* O = softmax(scale * Q K^T) V per group and head. `probs` may be empty; when */                         \
  /* given it receives the [groups][heads][lq][lk] attention weights. */                                    \
  void attention_forward(const AttentionShape& s, std::span<const double> q, std::span<const double> k,     \
                         std::span<const double> v, std::span<double> out, std::span<double> probs);        \
  /* Gradients of attention_forward given the saved probabilities. dq/dk/dv are overwritten. */             \
  void attention_backward(const AttentionShape& s, std::span<const double> q, std::span<const double> k,    \
                          std::span<const double> v, std::span<const double> probs,                         \
                          std::span<const double> dout, std::span<double> dq, std::span<double> dk,         \
                          std::span<double> dv);

namespace serial {
IDKIT_KERNEL_DECLS
}

namespace omp {
IDKIT_KERNEL_DECLS
}

// Dispatching entry points (OpenMP build).
IDKIT_KERNEL_DECLS

#undef IDKIT_KERNEL_DECLS

// Threads the OpenMP kernels will use.
int max_threads();

}  // namespace idkit::kernels
