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

#include <cstdint>
#include <vector>

#include "idkit/diffusion/backbone.hpp"

namespace idkit {

struct SamplerSettings {
  int frames = 16;
  int channels = 4;
  int height = 64;
  int width = 64;
  int steps = 25;
  double guidance_scale = 7.5;
  std::uint64_t seed = 0;
};

// Evenly strided subset of [0, n_steps), ascending. Throws ArgumentError when
// more steps are requested than the schedule has.
std::vector<int> sampling_timesteps(int n_steps, int steps);

LatentVideo sampling_initial_noise(const SamplerSettings& s);
// Noise injected when leaving sampling step `i` (counted from the end).
LatentVideo sampling_step_noise(const SamplerSettings& s, int i);

// Ancestral DDPM over the strided timesteps with classifier-free guidance
// eps = eps_u + s (eps_c - eps_u). Scale 1 evaluates only the conditional
// branch and scale 0 only the unconditional one.
LatentVideo cfg_sample(const SamplerSettings& settings, const ConditionBundle& cond, const ConditionBundle& uncond,
                       const NoisePredictor& predictor, const NoiseSchedule& sched);

}  // namespace idkit
