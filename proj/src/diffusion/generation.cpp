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

#include "idkit/diffusion/generation.hpp"

#include <cmath>

#include "idkit/adapter/encoder.hpp"
#include "idkit/adapter/mixing.hpp"
#include "idkit/core/error.hpp"
#include "idkit/diffusion/vae.hpp"

namespace idkit {

void GenerationConfig::validate() const {
  if (frames < 1) throw ArgumentError("frames must be positive");
  if (steps < 1) throw ArgumentError("steps must be positive");
  if (!std::isfinite(lambda) || lambda < 0.0) throw ArgumentError("lambda must be finite and >= 0");
  if (!std::isfinite(guidance_scale) || guidance_scale < 0.0) throw ArgumentError("guidance scale must be >= 0");
  if (!mix_weights.empty() && mix_weights.size() != reference_images.size())
    throw ArgumentError(std::to_string(mix_weights.size()) + " mix weights for " +
                        std::to_string(reference_images.size()) + " reference images");
}

nlohmann::json GenerationConfig::to_json() const {
  return {{"prompt", prompt}, {"reference_images", reference_images}, {"mix_weights", mix_weights},
          {"lambda", lambda}, {"guidance_scale", guidance_scale},     {"frames", frames},
          {"steps", steps},   {"seed", seed},                         {"uncond_zero_face", uncond_zero_face}};
}

GenerationConfig GenerationConfig::from_json(const nlohmann::json& j) {
  GenerationConfig c;
  try {
    c.prompt = j.value("prompt", c.prompt);
    c.reference_images = j.value("reference_images", c.reference_images);
    c.mix_weights = j.value("mix_weights", c.mix_weights);
    c.lambda = j.value("lambda", c.lambda);
    c.guidance_scale = j.value("guidance_scale", c.guidance_scale);
    c.frames = j.value("frames", c.frames);
    c.steps = j.value("steps", c.steps);
    c.seed = j.value("seed", c.seed);
    c.uncond_zero_face = j.value("uncond_zero_face", c.uncond_zero_face);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("generation config: ") + e.what());
  }
  c.validate();
  return c;
}

GenerationResult generate(const GenerationConfig& config, const Backbone& backbone, const AdapterWeights* adapter,
                          const FeatureExtractor* extractor, std::span<const Image> references) {
  config.validate();
  if (references.size() != config.reference_images.size())
    throw ArgumentError("generate: " + std::to_string(references.size()) + " images for " +
                        std::to_string(config.reference_images.size()) + " reference names");

  GenerationResult result;
  ConditionBundle& cond = result.cond;
  cond.text_embedding = backbone.encode_text(config.prompt);
  cond.null_text = false;
  ConditionBundle uncond{backbone.null_text(), std::nullopt, true};

  if (!references.empty()) {
    if (!adapter) throw ConfigError("generate: reference images given without adapter weights");
    if (!extractor) throw ConfigError("generate: reference images given without a feature extractor");
    std::vector<FaceTokens> identities;
    for (std::size_t i = 0; i < references.size(); ++i) {
      identities.push_back(
          encode_face(extract_image_features(references[i], *extractor, config.reference_images[i]), *adapter));
    }
    if (identities.size() == 1 && config.mix_weights.empty()) {
      cond.face_tokens = std::move(identities.front());
    } else {
      std::vector<double> w = config.mix_weights;
      if (w.empty()) w.assign(identities.size(), 1.0);
      cond.face_tokens = mix_identities(identities, w);
    }
    if (config.uncond_zero_face) {
      FaceTokens zero{Matrix(cond.face_tokens->tokens.rows, cond.face_tokens->tokens.cols), {}};
      uncond.face_tokens = std::move(zero);
    } else {
      uncond.face_tokens = cond.face_tokens;
    }
  }

  const auto& spec = backbone.spec();
  SamplerSettings settings{config.frames, spec.channels,        spec.height,
                           spec.width,    config.steps,         config.guidance_scale,
                           config.seed};
  result.latent =
      cfg_sample(settings, cond, uncond, make_predictor(backbone, adapter, config.lambda), backbone.schedule());
  result.frames = ToyVae(spec.channels, spec.vae_factor).decode(result.latent);
  return result;
}

}  // namespace idkit
