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

#include "idkit/adapter/encoder.hpp"
#include "idkit/adapter/types.hpp"
#include "idkit/adapter/weights.hpp"
#include "idkit/autograd/var.hpp"

namespace idkit {

// The frozen query/key/value projections of one backbone cross-attention.
struct CrossAttentionWeights {
  Matrix w_q;  // [d_model x d_attn]
  Matrix w_k;  // [d_ctx x d_attn]
  Matrix w_v;  // [d_ctx x d_attn]
  int heads = 1;
};

struct CrossAttentionVars {
  ad::Var w_q;
  ad::Var w_k;
  ad::Var w_v;
  int heads = 1;
};

struct AttentionContext {
  Matrix text_ctx;  // [n_text x d_ctx]
  std::optional<FaceTokens> image_ctx;
  double lambda = 1.0;
};

// softmax(Q K_t^T / sqrt(d_head)) V_t with Q = Z W_q, K_t = C W_k, V_t = C W_v.
ad::Var text_cross_attention(const ad::Var& z, const ad::Var& text_ctx, const CrossAttentionVars& w);

// Text attention plus lambda times attention over the image keys/values
// K_i = c_i W_k_img, V_i = c_i W_v_img, sharing the same queries. With no
// image context or lambda == 0 the result is exactly text_cross_attention.
ad::Var decoupled_cross_attention(const ad::Var& z, const ad::Var& text_ctx, const ad::Var* image_ctx,
                                  const CrossAttentionVars& w, const ImageProjectionVars* image, double lambda);

Matrix decoupled_cross_attention(const Matrix& z, const AttentionContext& ctx, const CrossAttentionWeights& w,
                                 const LayerProjection* image);

}  // namespace idkit
