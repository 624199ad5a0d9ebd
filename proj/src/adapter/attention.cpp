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

#include "idkit/adapter/attention.hpp"

#include <cmath>

#include "idkit/core/error.hpp"

namespace idkit {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.all_finite()) throw NumericError(std::string("decoupled_cross_attention: non-finite ") + what);
}

}  // namespace

ad::Var text_cross_attention(const ad::Var& z, const ad::Var& text_ctx, const CrossAttentionVars& w) {
  ad::Var q = ad::matmul(z, w.w_q);
  ad::Var k = ad::matmul(text_ctx, w.w_k);
  ad::Var v = ad::matmul(text_ctx, w.w_v);
  return ad::attention(q, k, v, 1, w.heads);
}

ad::Var decoupled_cross_attention(const ad::Var& z, const ad::Var& text_ctx, const ad::Var* image_ctx,
                                  const CrossAttentionVars& w, const ImageProjectionVars* image, double lambda) {
  if (!std::isfinite(lambda)) throw NumericError("decoupled_cross_attention: lambda is not finite");
  ad::Var out = text_cross_attention(z, text_ctx, w);
  if (image_ctx == nullptr || lambda == 0.0) return out;
  if (image == nullptr) throw ConfigError("decoupled_cross_attention: image context without image projections");

  // The image branch reuses the text branch's queries.
  ad::Var q = ad::matmul(z, w.w_q);
  ad::Var k = ad::matmul(*image_ctx, image->w_k_img);
  ad::Var v = ad::matmul(*image_ctx, image->w_v_img);
  ad::Var image_out = ad::attention(q, k, v, 1, w.heads);
  return ad::add(out, ad::scale(image_out, lambda));
}

Matrix decoupled_cross_attention(const Matrix& z, const AttentionContext& ctx, const CrossAttentionWeights& w,
                                 const LayerProjection* image) {
  require_finite(z, "query features");
  require_finite(ctx.text_ctx, "text context");
  require_finite(w.w_q, "W_q");
  require_finite(w.w_k, "W_k");
  require_finite(w.w_v, "W_v");
  if (!std::isfinite(ctx.lambda)) throw NumericError("decoupled_cross_attention: lambda is not finite");
  if (ctx.lambda < 0.0) throw ArgumentError("decoupled_cross_attention: lambda must be >= 0");

  const CrossAttentionVars vars{ad::Var::constant(w.w_q), ad::Var::constant(w.w_k), ad::Var::constant(w.w_v),
                                w.heads};
  const ad::Var zv = ad::Var::constant(z);
  const ad::Var text = ad::Var::constant(ctx.text_ctx);

  if (!ctx.image_ctx) return decoupled_cross_attention(zv, text, nullptr, vars, nullptr, ctx.lambda).value();
  if (image == nullptr) throw ConfigError("decoupled_cross_attention: image context without image projections");
  require_finite(ctx.image_ctx->tokens, "image context");
  require_finite(image->w_k_img, "W_k_img");
  require_finite(image->w_v_img, "W_v_img");
  if (ctx.image_ctx->tokens.cols != ctx.text_ctx.cols)
    throw ShapeError("image context width " + std::to_string(ctx.image_ctx->tokens.cols) + " != text context width " +
                     std::to_string(ctx.text_ctx.cols));

  const ad::Var img = ad::Var::constant(ctx.image_ctx->tokens);
  const ImageProjectionVars proj{ad::Var::constant(image->w_k_img), ad::Var::constant(image->w_v_img)};
  return decoupled_cross_attention(zv, text, &img, vars, &proj, ctx.lambda).value();
}

}  // namespace idkit
