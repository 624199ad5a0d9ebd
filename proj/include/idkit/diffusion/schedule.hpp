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

#include <vector>

namespace idkit {

// Variance-preserving DDPM forward process with per-step betas.
class NoiseSchedule {
 public:
  static NoiseSchedule linear(int n_steps, double beta_start, double beta_end);
  static NoiseSchedule from_betas(std::vector<double> betas);

  int n_steps() const { return static_cast<int>(betas_.size()); }
  double beta(int t) const { return betas_.at(t); }
  double alpha_bar(int t) const { return alpha_bars_.at(t); }
  const std::vector<double>& betas() const { return betas_; }
  const std::vector<double>& alpha_bars() const { return alpha_bars_; }

 private:
  explicit NoiseSchedule(std::vector<double> betas);
  std::vector<double> betas_;
  std::vector<double> alpha_bars_;
};

}  // namespace idkit
