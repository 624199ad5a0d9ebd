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
#include <functional>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "idkit/adapter/extractor.hpp"
#include "idkit/core/matrix.hpp"
#include "idkit/diffusion/backbone_spec.hpp"

namespace idkit {

using NamedTensors = std::map<std::string, Matrix>;

struct AdapterConfig {
  int n_queries = 16;
  int d_query = 16;
  int d_enc = 16;
  int enc_heads = 1;
  bool layer_norm = true;  // normalize encoder output before the projection
  double lambda_default = 1.0;
  std::uint64_t seed = 0;
  ExtractorConfig extractor;

  int d_img() const { return extractor.d_img; }
  void validate() const;
  nlohmann::json to_json() const;
  static AdapterConfig from_json(const nlohmann::json& j);
};

// Image key/value projections added at one cross-attention site.
struct LayerProjection {
  Matrix w_k_img;  // [d_ctx x d_attn]
  Matrix w_v_img;  // [d_ctx x d_attn]
};

// Everything the adapter trains. Values are kept float32-representable.
struct AdapterWeights {
  AdapterConfig config;
  int d_ctx = 0;
  Matrix latent_queries;                     // [n_queries x d_query]
  std::map<std::string, Matrix> encoder;     // w_q [d_query x d_enc], w_k/w_v [d_img x d_enc], w_out [d_enc x d_ctx]
  std::map<std::string, LayerProjection> per_layer;
  double lambda_default = 1.0;

  // Visits every trainable tensor in a fixed order under its checkpoint name.
  void for_each(const std::function<void(const std::string&, Matrix&)>& fn);
  void for_each(const std::function<void(const std::string&, const Matrix&)>& fn) const;
  std::size_t parameter_count() const;

  NamedTensors flatten() const;
  static AdapterWeights unflatten(const AdapterConfig& config, int d_ctx, const NamedTensors& tensors);

  // Keys match the backbone's cross-attention ids, shapes agree, all finite.
  void validate(const BackboneSpec& spec) const;
};

inline constexpr double kImageKeyInitStd = 0.02;

// Fresh adapter for `spec`. Tensors present in `donor` are copied verbatim
// (must be float32-representable); the rest are drawn from seeded streams
// keyed by tensor name, so coverage does not change the uncovered values.
AdapterWeights init_adapter(const BackboneSpec& spec, const AdapterConfig& config,
                            const std::optional<NamedTensors>& donor = std::nullopt);

}  // namespace idkit
