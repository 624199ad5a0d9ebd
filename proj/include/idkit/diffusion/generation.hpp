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
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "idkit/adapter/extractor.hpp"
#include "idkit/adapter/weights.hpp"
#include "idkit/core/image.hpp"
#include "idkit/core/video.hpp"
#include "idkit/diffusion/backbone.hpp"
#include "idkit/diffusion/sampler.hpp"

namespace idkit {

struct GenerationConfig {
  std::string prompt;
  std::vector<std::string> reference_images;
  std::vector<double> mix_weights;
  double lambda = 1.0;
  double guidance_scale = 7.5;
  int frames = 16;
  int steps = 25;
  std::uint64_t seed = 0;
  // Unconditional branch also zeroes the face tokens (otherwise only the text is nulled).
  bool uncond_zero_face = true;

  void validate() const;
  nlohmann::json to_json() const;
  static GenerationConfig from_json(const nlohmann::json& j);
};

struct GenerationResult {
  LatentVideo latent;
  Video frames;
  ConditionBundle cond;
};

// Encodes each reference, blends them when more than one is given, and runs
// guided sampling. `references[i]` is the decoded image named by
// config.reference_images[i]. With no references the adapter is unused.
GenerationResult generate(const GenerationConfig& config, const Backbone& backbone, const AdapterWeights* adapter,
                          const FeatureExtractor* extractor, std::span<const Image> references);

}  // namespace idkit
