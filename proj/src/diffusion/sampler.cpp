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

#include "idkit/diffusion/sampler.hpp"

#include <cmath>

#include "idkit/core/error.hpp"
#include "idkit/core/rng.hpp"

namespace idkit {

namespace {
constexpr std::uint64_t kInitStream = 0x696e6974;
constexpr std::uint64_t kStepStream = 0x73746570;
}  // namespace

std::vector<int> sampling_timesteps(int n_steps, int steps) {
  if (steps < 1) throw ArgumentError("sampling steps must be positive");
  if (steps > n_steps)
    throw ArgumentError("requested " + std::to_string(steps) + " sampling steps but the schedule has only " +
                        std::to_string(n_steps));
  std::vector<int> ts(steps);
  for (int i = 0; i < steps; ++i) ts[i] = static_cast<int>(static_cast<long long>(i) * n_steps / steps);
  return ts;
}

LatentVideo sampling_initial_noise(const SamplerSettings& s) {
  Rng rng = make_rng(s.seed, {kInitStream});
  return LatentVideo::randn(s.frames, s.channels, s.height, s.width, rng);
}

LatentVideo sampling_step_noise(const SamplerSettings& s, int i) {
  Rng rng = make_rng(s.seed, {kStepStream, static_cast<std::uint64_t>(i)});
  return LatentVideo::randn(s.frames, s.channels, s.height, s.width, rng);
}

LatentVideo cfg_sample(const SamplerSettings& settings, const ConditionBundle& cond, const ConditionBundle& uncond,
                       const NoisePredictor& predictor, const NoiseSchedule& sched) {
  if (!(settings.guidance_scale >= 0.0) || !std::isfinite(settings.guidance_scale))
    throw ArgumentError("guidance scale must be finite and >= 0");
  const auto ts = sampling_timesteps(sched.n_steps(), settings.steps);
  const double s = settings.guidance_scale;

  LatentVideo x = sampling_initial_noise(settings);
  for (int i = settings.steps - 1; i >= 0; --i) {
    const int t = ts[i];
    LatentVideo eps;
    if (s == 1.0) {
      eps = predictor(x, t, cond);
    } else if (s == 0.0) {
      eps = predictor(x, t, uncond);
    } else {
      const LatentVideo eu = predictor(x, t, uncond);
      const LatentVideo ec = predictor(x, t, cond);
      eps = eu;
      for (std::size_t k = 0; k < eps.z.size(); ++k) eps.z[k] = eu.z[k] + s * (ec.z[k] - eu.z[k]);
    }

    const double ab_t = sched.alpha_bar(t);
    const double ab_prev = i > 0 ? sched.alpha_bar(ts[i - 1]) : 1.0;
    const double beta = 1.0 - ab_t / ab_prev;
    const double eps_coef = beta / std::sqrt(1.0 - ab_t);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(1.0 - beta);
    for (std::size_t k = 0; k < x.z.size(); ++k) x.z[k] = inv_sqrt_alpha * (x.z[k] - eps_coef * eps.z[k]);
    if (i > 0) {
      const double sigma = std::sqrt(beta * (1.0 - ab_prev) / (1.0 - ab_t));
      const LatentVideo noise = sampling_step_noise(settings, i);
      for (std::size_t k = 0; k < x.z.size(); ++k) x.z[k] += sigma * noise.z[k];
    }
    if (!x.all_finite()) throw NumericError("cfg_sample: latent diverged at step " + std::to_string(i));
  }
  return x;
}

}  // namespace idkit
