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

#include <map>
#include <string>

#include "idkit/adapter/types.hpp"
#include "idkit/adapter/weights.hpp"
#include "idkit/autograd/var.hpp"

namespace idkit {

struct EncoderVars {
  ad::Var latent_queries;
  ad::Var w_q;
  ad::Var w_k;
  ad::Var w_v;
  ad::Var w_out;
};

struct ImageProjectionVars {
  ad::Var w_k_img;
  ad::Var w_v_img;
};

// Graph view of an AdapterWeights: parameters when training, constants
// otherwise.
struct AdapterVars {
  EncoderVars encoder;
  std::map<std::string, ImageProjectionVars> per_layer;

  static AdapterVars from(const AdapterWeights& w, bool trainable);
  // Same order and names as AdapterWeights::for_each.
  std::vector<std::pair<std::string, ad::Var>> named() const;
};

// Latent queries cross-attend to the image features; the attended tokens are
// (optionally) layer-normalized and projected to the text-context width.
ad::Var encode_face(const ad::Var& features, const EncoderVars& vars, const AdapterConfig& config);

FaceTokens encode_face(const ImageFeatures& features, const AdapterWeights& weights);

}  // namespace idkit
