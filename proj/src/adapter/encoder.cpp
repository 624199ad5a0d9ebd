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

#include "idkit/adapter/encoder.hpp"

#include "idkit/core/error.hpp"

namespace idkit {

AdapterVars AdapterVars::from(const AdapterWeights& w, bool trainable) {
  auto make = [trainable](const Matrix& m) { return trainable ? ad::Var::parameter(m) : ad::Var::constant(m); };
  AdapterVars v;
  v.encoder.latent_queries = make(w.latent_queries);
  v.encoder.w_q = make(w.encoder.at("w_q"));
  v.encoder.w_k = make(w.encoder.at("w_k"));
  v.encoder.w_v = make(w.encoder.at("w_v"));
  v.encoder.w_out = make(w.encoder.at("w_out"));
  for (const auto& [id, p] : w.per_layer) v.per_layer[id] = {make(p.w_k_img), make(p.w_v_img)};
  return v;
}

std::vector<std::pair<std::string, ad::Var>> AdapterVars::named() const {
  std::vector<std::pair<std::string, ad::Var>> out{{"latent_queries", encoder.latent_queries},
                                                   {"encoder.w_k", encoder.w_k},
                                                   {"encoder.w_out", encoder.w_out},
                                                   {"encoder.w_q", encoder.w_q},
                                                   {"encoder.w_v", encoder.w_v}};
  for (const auto& [id, p] : per_layer) {
    out.push_back({"layers." + id + ".w_k_img", p.w_k_img});
    out.push_back({"layers." + id + ".w_v_img", p.w_v_img});
  }
  return out;
}

ad::Var encode_face(const ad::Var& features, const EncoderVars& vars, const AdapterConfig& config) {
  if (features.cols() != vars.w_k.rows()) {
    throw ShapeError("encode_face: feature dim " + std::to_string(features.cols()) + " != encoder input dim " +
                     std::to_string(vars.w_k.rows()));
  }
  ad::Var q = ad::matmul(vars.latent_queries, vars.w_q);
  ad::Var k = ad::matmul(features, vars.w_k);
  ad::Var v = ad::matmul(features, vars.w_v);
  ad::Var attended = ad::attention(q, k, v, 1, config.enc_heads);
  if (config.layer_norm) attended = ad::layer_norm_rows(attended);
  return ad::matmul(attended, vars.w_out);
}

FaceTokens encode_face(const ImageFeatures& features, const AdapterWeights& weights) {
  if (!features.tokens.all_finite()) throw NumericError("encode_face: non-finite features from " + features.source_id);
  const AdapterVars vars = AdapterVars::from(weights, false);
  ad::Var out = encode_face(ad::Var::constant(features.tokens), vars.encoder, weights.config);
  return {out.value(), {{features.source_id, 1.0}}};
}

}  // namespace idkit
