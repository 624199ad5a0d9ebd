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

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "idkit/adapter/attention.hpp"
#include "idkit/adapter/encoder.hpp"
#include "idkit/adapter/types.hpp"
#include "idkit/adapter/weights.hpp"
#include "idkit/autograd/var.hpp"
#include "idkit/diffusion/backbone_spec.hpp"
#include "idkit/diffusion/latent.hpp"
#include "idkit/diffusion/schedule.hpp"

namespace idkit {

// Conditioning for one noise prediction: the text context C and, when the
// adapter is active, the identity tokens.
struct ConditionBundle {
  Matrix text_embedding;
  std::optional<FaceTokens> face_tokens;
  bool null_text = false;
};

// Frozen toy text-to-video denoiser. Per cross-attention site: average-pool
// the latent, lift to d_model, add a time embedding, run (decoupled)
// cross-attention with a residual, optionally mix across frames per pixel,
// project back to latent channels, and upsample. The site outputs are summed
// on top of a fixed skip term sqrt(1 - alpha_bar_t) * z_t.
//
// Weights are generated once from the spec's seed and never change; the
// object is immutable and safe to share across threads.
class Backbone {
 public:
  explicit Backbone(BackboneSpec spec);

  const BackboneSpec& spec() const { return spec_; }
  const NoiseSchedule& schedule() const { return schedule_; }

  Matrix encode_text(std::string_view prompt) const;
  const Matrix& null_text() const { return null_text_; }

  const NamedTensors& parameters() const { return params_; }
  const Matrix& parameter(const std::string& name) const;
  // FNV-1a over every parameter name and value.
  std::uint64_t checksum() const;

  double skip_coefficient(int t) const;
  Matrix time_embedding(int t, int dim) const;
  CrossAttentionWeights cross_attention(const std::string& site_id) const;

  // Graph forward pass producing eps_hat as a [T*H*W x C] token matrix.
  // `face_tokens` may be null; when given, `adapter` must hold projections for
  // exactly this backbone's cross-attention sites.
  ad::Var forward(const LatentVideo& z_t, int t, const Matrix& text, const ad::Var* face_tokens,
                  const AdapterVars* adapter, double lambda) const;

 private:
  ad::Var temporal_mix(const ad::Var& h, int frames, int pixels) const;

  BackboneSpec spec_;
  NoiseSchedule schedule_;
  NamedTensors params_;
  Matrix null_text_;
};

// z_t = sqrt(alpha_bar_t) z + sqrt(1 - alpha_bar_t) eps
LatentVideo forward_diffuse(const LatentVideo& z, int t, const LatentVideo& eps, const NoiseSchedule& sched);

LatentVideo predict_noise(const LatentVideo& z_t, int t, const ConditionBundle& cond, const Backbone& backbone,
                          const AdapterWeights* adapter, double lambda);

using NoisePredictor = std::function<LatentVideo(const LatentVideo& z_t, int t, const ConditionBundle& cond)>;

NoisePredictor make_predictor(const Backbone& backbone, const AdapterWeights* adapter, double lambda);

}  // namespace idkit
