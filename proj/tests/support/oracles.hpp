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

// Independent reference implementations shared by the unit tests and the
// acceptance suite. Nothing here calls the code under test for the value
// being checked.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "idkit/adapter/attention.hpp"
#include "idkit/adapter/encoder.hpp"
#include "idkit/adapter/weights.hpp"
#include "idkit/diffusion/backbone.hpp"
#include "idkit/diffusion/loss.hpp"
#include "idkit/diffusion/sampler.hpp"
#include "test_util.hpp"

namespace idkit::testing {

// Softmax attention of one query row against (keys, values) restricted to
// head columns [h*dh, (h+1)*dh), written without any library helpers.
inline std::vector<double> naive_head(const std::vector<double>& q, const Matrix& k, const Matrix& v, int h, int dh) {
  std::vector<double> scores(k.rows);
  double mx = -INFINITY;
  for (int j = 0; j < k.rows; ++j) {
    double s = 0.0;
    for (int d = 0; d < dh; ++d) s += q[h * dh + d] * k(j, h * dh + d);
    scores[j] = s / std::sqrt(static_cast<double>(dh));
    mx = std::max(mx, scores[j]);
  }
  double z = 0.0;
  for (double& s : scores) z += (s = std::exp(s - mx));
  std::vector<double> out(dh, 0.0);
  for (int j = 0; j < k.rows; ++j)
    for (int d = 0; d < dh; ++d) out[d] += scores[j] / z * v(j, h * dh + d);
  return out;
}

// Z_new = Attn(Q, K_t, V_t) + lambda * Attn(Q, K_i, V_i), evaluated row by row.
inline Matrix brute_force_decoupled(const Matrix& z, const Matrix& text, const Matrix& image, const CrossAttentionWeights& w,
                             const LayerProjection& p, double lambda) {
  auto project = [](const Matrix& x, const Matrix& wm) {
    Matrix out(x.rows, wm.cols);
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < wm.cols; ++j)
        for (int k = 0; k < x.cols; ++k) out(i, j) += x(i, k) * wm(k, j);
    return out;
  };
  const Matrix q = project(z, w.w_q);
  const Matrix kt = project(text, w.w_k), vt = project(text, w.w_v);
  const Matrix ki = project(image, p.w_k_img), vi = project(image, p.w_v_img);
  const int dh = q.cols / w.heads;
  Matrix out(z.rows, vt.cols);
  for (int i = 0; i < z.rows; ++i) {
    std::vector<double> qi(q.row(i).begin(), q.row(i).end());
    for (int h = 0; h < w.heads; ++h) {
      auto a = naive_head(qi, kt, vt, h, dh);
      auto b = naive_head(qi, ki, vi, h, dh);
      for (int d = 0; d < dh; ++d) out(i, h * dh + d) = a[d] + lambda * b[d];
    }
  }
  return out;
}

// Unguided ancestral sampling with a single condition, written out here as
// the reference trajectory.
inline LatentVideo single_branch_sample(const SamplerSettings& st, const ConditionBundle& cond, const NoisePredictor& pred,
                                        const NoiseSchedule& sched) {
  const auto ts = sampling_timesteps(sched.n_steps(), st.steps);
  LatentVideo x = sampling_initial_noise(st);
  for (int i = st.steps - 1; i >= 0; --i) {
    const LatentVideo eps = pred(x, ts[i], cond);
    const double ab_t = sched.alpha_bar(ts[i]);
    const double ab_prev = i > 0 ? sched.alpha_bar(ts[i - 1]) : 1.0;
    const double beta = 1.0 - ab_t / ab_prev;
    const double eps_coef = beta / std::sqrt(1.0 - ab_t);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(1.0 - beta);
    for (std::size_t k = 0; k < x.size(); ++k) x.z[k] = inv_sqrt_alpha * (x.z[k] - eps_coef * eps.z[k]);
    if (i > 0) {
      const double sigma = std::sqrt(beta * (1.0 - ab_prev) / (1.0 - ab_t));
      const LatentVideo noise = sampling_step_noise(st, i);
      for (std::size_t k = 0; k < x.size(); ++k) x.z[k] += sigma * noise.z[k];
    }
  }
  return x;
}

inline LatentVideo random_latent(int t, int c, int h, int w, std::uint64_t seed) {
  Rng r = make_rng(seed, {});
  return LatentVideo::randn(t, c, h, w, r);
}

// Fresh adapter with a nonzero value projection, so the image branch is live.
inline AdapterWeights active_adapter(const BackboneSpec& spec, std::uint64_t seed) {
  AdapterConfig cfg;
  cfg.seed = seed;
  AdapterWeights w = init_adapter(spec, cfg);
  std::mt19937_64 g(seed);
  for (auto& [id, p] : w.per_layer) {
    p.w_v_img = random_matrix(p.w_v_img.rows, p.w_v_img.cols, g, 0.3);
    round_to_float(p.w_v_img);
  }
  return w;
}

inline std::vector<TrainingExample> random_batch(const Backbone& bb, int n, std::uint64_t seed) {
  const auto& s = bb.spec();
  std::vector<TrainingExample> batch;
  for (int i = 0; i < n; ++i) {
    TrainingExample ex;
    ex.z = random_latent(s.frames, s.channels, s.height, s.width, seed * 100 + 2 * i);
    ex.eps = random_latent(s.frames, s.channels, s.height, s.width, seed * 100 + 2 * i + 1);
    ex.t = 50 + 97 * i;
    ex.text = bb.encode_text("sample " + std::to_string(i));
    batch.push_back(std::move(ex));
  }
  return batch;
}

struct GradientCheck {
  int checked = 0;
  double worst = 0.0;  // max |analytic - fd| / max(|analytic|, |fd|, 1e-5)
  std::string worst_entry;
};

// Central differences of training_loss over every adapter tensor, sampling
// about `per_tensor` entries of each.
inline GradientCheck check_adapter_gradients(const Backbone& bb, const AdapterWeights& w,
                                             const std::vector<TrainingExample>& batch, int per_tensor = 5,
                                             double h = 1e-5) {
  AdapterVars vars = AdapterVars::from(w, true);
  ad::Var loss = training_loss(batch, bb, &vars, &w.config, 1.0);
  ad::backward(loss);
  GradientCheck out;
  for (const auto& [name, v] : vars.named()) {
    const Matrix grad = v.grad();
    const std::size_t stride = std::max<std::size_t>(1, grad.data.size() / static_cast<std::size_t>(per_tensor));
    for (std::size_t e = 0; e < grad.data.size(); e += stride) {
      NamedTensors up = w.flatten(), dn = up;
      up[name].data[e] += h;
      dn[name].data[e] -= h;
      const AdapterWeights wu = AdapterWeights::unflatten(w.config, w.d_ctx, up);
      const AdapterWeights wd = AdapterWeights::unflatten(w.config, w.d_ctx, dn);
      const double fd = (training_loss(batch, bb, &wu, 1.0) - training_loss(batch, bb, &wd, 1.0)) / (2 * h);
      const double an = grad.data[e];
      const double err = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-5});
      if (err >= out.worst) {
        out.worst = err;
        out.worst_entry = name + "[" + std::to_string(e) + "]";
      }
      ++out.checked;
    }
  }
  return out;
}

}  // namespace idkit::testing
