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

#include "idkit/diffusion/schedule.hpp"

#include <cmath>

#include "idkit/core/error.hpp"

namespace idkit {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.empty()) throw ArgumentError("noise schedule needs at least one step");
  alpha_bars_.reserve(betas_.size());
  double prod = 1.0;
  for (double b : betas_) {
    if (!(b > 0.0 && b < 1.0)) throw ArgumentError("betas must lie in (0, 1)");
    prod *= 1.0 - b;
    alpha_bars_.push_back(prod);
  }
}

NoiseSchedule NoiseSchedule::linear(int n_steps, double beta_start, double beta_end) {
  if (n_steps < 1) throw ArgumentError("n_steps must be positive");
  std::vector<double> betas(n_steps);
  for (int i = 0; i < n_steps; ++i) {
    const double f = n_steps == 1 ? 0.0 : static_cast<double>(i) / (n_steps - 1);
    betas[i] = beta_start + f * (beta_end - beta_start);
  }
  return NoiseSchedule(std::move(betas));
}

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas) { return NoiseSchedule(std::move(betas)); }

}  // namespace idkit
