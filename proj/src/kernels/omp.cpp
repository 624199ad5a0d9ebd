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

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "idkit/kernels/kernels.hpp"

namespace idkit::kernels {

namespace {
// Below this many multiply-adds the fork/join costs more than it saves.
constexpr long kParallelWork = 1 << 15;
}  // namespace

namespace omp {

void gemm_nn(int m, int n, int k, std::span<const double> a, std::span<const double> b, std::span<double> c) {
#pragma omp parallel for schedule(static) if (static_cast<long>(m) * n * k > kParallelWork)
  for (int i = 0; i < m; ++i) {
    double* ci = c.data() + static_cast<std::size_t>(i) * n;
    std::fill(ci, ci + n, 0.0);
    for (int p = 0; p < k; ++p) {
      const double aip = a[static_cast<std::size_t>(i) * k + p];
      const double* bp = b.data() + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void gemm_tn(int m, int n, int k, std::span<const double> a, std::span<const double> b, std::span<double> c) {
#pragma omp parallel for schedule(static) if (static_cast<long>(m) * n * k > kParallelWork)
  for (int i = 0; i < m; ++i) {
    double* ci = c.data() + static_cast<std::size_t>(i) * n;
    std::fill(ci, ci + n, 0.0);
    for (int p = 0; p < k; ++p) {
      const double api = a[static_cast<std::size_t>(p) * m + i];
      const double* bp = b.data() + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
}

void gemm_nt(int m, int n, int k, std::span<const double> a, std::span<const double> b, std::span<double> c) {
#pragma omp parallel for collapse(2) schedule(static) if (static_cast<long>(m) * n * k > kParallelWork)
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const double* ai = a.data() + static_cast<std::size_t>(i) * k;
      const double* bj = b.data() + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      c[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
}

void attention_forward(const AttentionShape& s, std::span<const double> q, std::span<const double> k,
                       std::span<const double> v, std::span<double> out, std::span<double> probs) {
  const int qk_stride = s.heads * s.dk;
  const int v_stride = s.heads * s.dv;
  const long rows = static_cast<long>(s.groups) * s.heads * s.lq;
  const long work = rows * s.lk * (s.dk + s.dv);

#pragma omp parallel if (work > kParallelWork)
  {
    std::vector<double> p(s.lk);
#pragma omp for schedule(static)
    for (long r = 0; r < rows; ++r) {
      const int i = static_cast<int>(r % s.lq);
      const int h = static_cast<int>((r / s.lq) % s.heads);
      const int g = static_cast<int>(r / (static_cast<long>(s.lq) * s.heads));
      const double* qi = q.data() + static_cast<std::size_t>(g * s.lq + i) * qk_stride + h * s.dk;
      double mx = -INFINITY;
      for (int j = 0; j < s.lk; ++j) {
        const double* kj = k.data() + static_cast<std::size_t>(g * s.lk + j) * qk_stride + h * s.dk;
        double dot = 0.0;
        for (int c = 0; c < s.dk; ++c) dot += qi[c] * kj[c];
        p[j] = s.scale * dot;
        mx = std::max(mx, p[j]);
      }
      double sum = 0.0;
      for (int j = 0; j < s.lk; ++j) {
        p[j] = std::exp(p[j] - mx);
        sum += p[j];
      }
      for (int j = 0; j < s.lk; ++j) p[j] /= sum;

      double* oi = out.data() + static_cast<std::size_t>(g * s.lq + i) * v_stride + h * s.dv;
      std::fill(oi, oi + s.dv, 0.0);
      for (int j = 0; j < s.lk; ++j) {
        const double* vj = v.data() + static_cast<std::size_t>(g * s.lk + j) * v_stride + h * s.dv;
        for (int c = 0; c < s.dv; ++c) oi[c] += p[j] * vj[c];
      }
      if (!probs.empty()) std::copy(p.begin(), p.end(), probs.begin() + static_cast<std::size_t>(r) * s.lk);
    }
  }
}

void attention_backward(const AttentionShape& s, std::span<const double> q, std::span<const double> k,
                        std::span<const double> v, std::span<const double> probs, std::span<const double> dout,
                        std::span<double> dq, std::span<double> dk, std::span<double> dv) {
  const int qk_stride = s.heads * s.dk;
  const int v_stride = s.heads * s.dv;
  std::vector<double> ds(s.prob_count());
  const long qrows = static_cast<long>(s.groups) * s.heads * s.lq;
  const long krows = static_cast<long>(s.groups) * s.heads * s.lk;
  const long work = qrows * s.lk * (s.dk + s.dv);

#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (long r = 0; r < qrows; ++r) {
    const int i = static_cast<int>(r % s.lq);
    const int h = static_cast<int>((r / s.lq) % s.heads);
    const int g = static_cast<int>(r / (static_cast<long>(s.lq) * s.heads));
    const std::size_t base = static_cast<std::size_t>(r) * s.lk;
    const double* doi = dout.data() + static_cast<std::size_t>(g * s.lq + i) * v_stride + h * s.dv;
    double rowdot = 0.0;
    for (int j = 0; j < s.lk; ++j) {
      const double* vj = v.data() + static_cast<std::size_t>(g * s.lk + j) * v_stride + h * s.dv;
      double dp = 0.0;
      for (int c = 0; c < s.dv; ++c) dp += doi[c] * vj[c];
      ds[base + j] = dp;
      rowdot += probs[base + j] * dp;
    }
    for (int j = 0; j < s.lk; ++j) ds[base + j] = probs[base + j] * (ds[base + j] - rowdot);

    double* dqi = dq.data() + static_cast<std::size_t>(g * s.lq + i) * qk_stride + h * s.dk;
    std::fill(dqi, dqi + s.dk, 0.0);
    for (int j = 0; j < s.lk; ++j) {
      const double* kj = k.data() + static_cast<std::size_t>(g * s.lk + j) * qk_stride + h * s.dk;
      for (int c = 0; c < s.dk; ++c) dqi[c] += ds[base + j] * kj[c];
    }
    for (int c = 0; c < s.dk; ++c) dqi[c] *= s.scale;
  }

#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (long r = 0; r < krows; ++r) {
    const int j = static_cast<int>(r % s.lk);
    const int h = static_cast<int>((r / s.lk) % s.heads);
    const int g = static_cast<int>(r / (static_cast<long>(s.lk) * s.heads));
    double* dkj = dk.data() + static_cast<std::size_t>(g * s.lk + j) * qk_stride + h * s.dk;
    double* dvj = dv.data() + static_cast<std::size_t>(g * s.lk + j) * v_stride + h * s.dv;
    std::fill(dkj, dkj + s.dk, 0.0);
    std::fill(dvj, dvj + s.dv, 0.0);
    for (int i = 0; i < s.lq; ++i) {
      const std::size_t idx = ((static_cast<std::size_t>(g) * s.heads + h) * s.lq + i) * s.lk + j;
      const double* qi = q.data() + static_cast<std::size_t>(g * s.lq + i) * qk_stride + h * s.dk;
      const double* doi = dout.data() + static_cast<std::size_t>(g * s.lq + i) * v_stride + h * s.dv;
      for (int c = 0; c < s.dk; ++c) dkj[c] += ds[idx] * qi[c];
      for (int c = 0; c < s.dv; ++c) dvj[c] += probs[idx] * doi[c];
    }
    for (int c = 0; c < s.dk; ++c) dkj[c] *= s.scale;
  }
}

}  // namespace omp

void gemm_nn(int m, int n, int k, std::span<const double> a, std::span<const double> b, std::span<double> c) {
  omp::gemm_nn(m, n, k, a, b, c);
}
void gemm_tn(int m, int n, int k, std::span<const double> a, std::span<const double> b, std::span<double> c) {
  omp::gemm_tn(m, n, k, a, b, c);
}
void gemm_nt(int m, int n, int k, std::span<const double> a, std::span<const double> b, std::span<double> c) {
  omp::gemm_nt(m, n, k, a, b, c);
}
void attention_forward(const AttentionShape& s, std::span<const double> q, std::span<const double> k,
                       std::span<const double> v, std::span<double> out, std::span<double> probs) {
  omp::attention_forward(s, q, k, v, out, probs);
}
void attention_backward(const AttentionShape& s, std::span<const double> q, std::span<const double> k,
                        std::span<const double> v, std::span<const double> probs, std::span<const double> dout,
                        std::span<double> dq, std::span<double> dk, std::span<double> dv) {
  omp::attention_backward(s, q, k, v, probs, dout, dq, dk, dv);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace idkit::kernels
