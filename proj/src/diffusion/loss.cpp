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

#include "idkit/diffusion/loss.hpp"

#include "idkit/core/error.hpp"

namespace idkit {

double training_loss(std::span<const TrainingExample> batch, const NoisePredictor& predictor,
                     const NoiseSchedule& sched) {
  if (batch.empty()) throw ArgumentError("training_loss: empty batch");
  double total = 0.0;
  for (const auto& ex : batch) {
    const LatentVideo z_t = forward_diffuse(ex.z, ex.t, ex.eps, sched);
    ConditionBundle cond{ex.text, std::nullopt, ex.null_text};
    const LatentVideo eps_hat = predictor(z_t, ex.t, cond);
    if (!eps_hat.same_shape(ex.eps)) throw ShapeError("training_loss: prediction shape differs from noise shape");
    double acc = 0.0;
    for (std::size_t i = 0; i < eps_hat.z.size(); ++i) {
      const double d = ex.eps.z[i] - eps_hat.z[i];
      acc += d * d;
    }
    total += acc / static_cast<double>(eps_hat.z.size());
  }
  return total / static_cast<double>(batch.size());
}

ad::Var training_loss(std::span<const TrainingExample> batch, const Backbone& backbone, const AdapterVars* adapter,
                      const AdapterConfig* config, double lambda) {
  if (batch.empty()) throw ArgumentError("training_loss: empty batch");
  std::vector<ad::Var> per_sample;
  per_sample.reserve(batch.size());
  for (const auto& ex : batch) {
    const LatentVideo z_t = forward_diffuse(ex.z, ex.t, ex.eps, backbone.schedule());
    std::optional<ad::Var> face;
    if (ex.reference && adapter) {
      face = encode_face(ad::Var::constant(ex.reference->tokens), adapter->encoder, *config);
    }
    ad::Var eps_hat = backbone.forward(z_t, ex.t, ex.text, face ? &*face : nullptr, adapter, lambda);
    per_sample.push_back(ad::mse(eps_hat, ex.eps.to_tokens()));
  }
  return ad::mean_scalars(per_sample);
}

double training_loss(std::span<const TrainingExample> batch, const Backbone& backbone, const AdapterWeights* adapter,
                     double lambda) {
  std::optional<AdapterVars> vars;
  if (adapter) vars = AdapterVars::from(*adapter, false);
  return training_loss(batch, backbone, vars ? &*vars : nullptr, adapter ? &adapter->config : nullptr, lambda)
      .value()(0, 0);
}

}  // namespace idkit
