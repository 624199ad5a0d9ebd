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

#include <optional>
#include <span>
#include <string>

#include "idkit/adapter/encoder.hpp"
#include "idkit/adapter/types.hpp"
#include "idkit/autograd/var.hpp"
#include "idkit/diffusion/backbone.hpp"

namespace idkit {

// One element of a training batch. `reference` carries the image features of
// the conditioning face; the face tokens are computed inside the graph so the
// encoder receives gradients.
struct TrainingExample {
  LatentVideo z;
  int t = 0;
  LatentVideo eps;
  Matrix text;
  bool null_text = false;
  std::optional<ImageFeatures> reference;
  std::string ref_id;
};

// Mean over the batch of the per-element mean squared error between eps and
// the predictor's output at z_t = forward_diffuse(z, t, eps).
double training_loss(std::span<const TrainingExample> batch, const NoisePredictor& predictor,
                     const NoiseSchedule& sched);

// Differentiable version against the frozen backbone and a (possibly
// trainable) adapter.
ad::Var training_loss(std::span<const TrainingExample> batch, const Backbone& backbone, const AdapterVars* adapter,
                      const AdapterConfig* config, double lambda);

double training_loss(std::span<const TrainingExample> batch, const Backbone& backbone, const AdapterWeights* adapter,
                     double lambda);

}  // namespace idkit
