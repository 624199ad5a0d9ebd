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

#include "idkit/diffusion/backbone.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "idkit/core/error.hpp"
#include "idkit/core/hash.hpp"
#include "idkit/core/rng.hpp"

namespace idkit {

namespace {

Matrix seeded(const BackboneSpec& spec, const std::string& name, int rows, int cols, double stddev) {
  Rng rng = make_rng(spec.weight_seed, {fnv1a(name)});
  Matrix m = randn(rows, cols, stddev, rng);
  round_to_float(m);
  return m;
}

double fan_in_std(int fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

std::vector<std::string> words_of(std::string_view prompt) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : prompt) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Average-pool a [T*H*W x C] token matrix by `f` in both spatial axes.
Matrix pool_tokens(const Matrix& tokens, int frames, int height, int width, int f) {
  if (f == 1) return tokens;
  const int h = height / f, w = width / f;
  Matrix out(frames * h * w, tokens.cols);
  const double inv = 1.0 / (f * f);
  for (int t = 0; t < frames; ++t)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        auto src = tokens.row((t * height + y) * width + x);
        auto dst = out.row((t * h + y / f) * w + x / f);
        for (int c = 0; c < tokens.cols; ++c) dst[c] += inv * src[c];
      }
  return out;
}

std::vector<int> upsample_index(int frames, int height, int width, int f) {
  const int h = height / f, w = width / f;
  std::vector<int> idx(static_cast<std::size_t>(frames) * height * width);
  for (int t = 0; t < frames; ++t)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) idx[(t * height + y) * width + x] = (t * h + y / f) * w + x / f;
  return idx;
}

}  // namespace

Backbone::Backbone(BackboneSpec spec)
    : spec_(std::move(spec)), schedule_(NoiseSchedule::linear(spec_.n_steps, spec_.beta_start, spec_.beta_end)) {
  spec_.validate();
  const int C = spec_.channels;
  for (const auto& s : spec_.sites) {
    const std::string p = "sites." + s.id + ".";
    params_[p + "w_in"] = seeded(spec_, p + "w_in", C, s.d_model, fan_in_std(C));
    params_[p + "w_time"] = seeded(spec_, p + "w_time", s.d_model, s.d_model, fan_in_std(s.d_model));
    params_[p + "w_q"] = seeded(spec_, p + "w_q", s.d_model, s.d_attn, fan_in_std(s.d_model));
    params_[p + "w_k"] = seeded(spec_, p + "w_k", spec_.d_ctx, s.d_attn, fan_in_std(spec_.d_ctx));
    params_[p + "w_v"] = seeded(spec_, p + "w_v", spec_.d_ctx, s.d_attn, fan_in_std(spec_.d_ctx));
    params_[p + "w_o"] = seeded(spec_, p + "w_o", s.d_attn, s.d_model, fan_in_std(s.d_attn));
    params_[p + "w_out"] = seeded(spec_, p + "w_out", s.d_model, C, spec_.site_gain * fan_in_std(s.d_model));
  }
  const int d = spec_.sites[spec_.temporal_after].d_model;
  for (const char* n : {"w_q", "w_k", "w_v", "w_o"}) {
    const std::string name = std::string(kTemporalLayerId) + "." + n;
    params_[name] = seeded(spec_, name, d, d, fan_in_std(d));
  }
  params_["text.pad"] = seeded(spec_, "text.pad", 1, spec_.d_ctx, 1.0);
  params_["text.position"] = seeded(spec_, "text.position", spec_.n_text, spec_.d_ctx, 0.1);
  null_text_ = encode_text("");
}

const Matrix& Backbone::parameter(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("backbone has no parameter '" + name + "'");
  return it->second;
}

Matrix Backbone::encode_text(std::string_view prompt) const {
  const auto words = words_of(prompt);
  const Matrix& pad = parameter("text.pad");
  const Matrix& pos = parameter("text.position");
  Matrix out(spec_.n_text, spec_.d_ctx);
  for (int i = 0; i < spec_.n_text; ++i) {
    Matrix word = i < static_cast<int>(words.size())
                      ? seeded(spec_, "text.vocab." + words[i], 1, spec_.d_ctx, 1.0)
                      : pad;
    for (int c = 0; c < spec_.d_ctx; ++c) out(i, c) = word(0, c) + pos(i, c);
  }
  return out;
}

std::uint64_t Backbone::checksum() const {
  Fnv1a h;
  for (const auto& [name, m] : params_) {
    h.update(name);
    h.update(std::as_bytes(std::span(m.data)));
  }
  return h.digest();
}

double Backbone::skip_coefficient(int t) const { return std::sqrt(1.0 - schedule_.alpha_bar(t)); }

Matrix Backbone::time_embedding(int t, int dim) const {
  Matrix e(1, dim);
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::pow(10000.0, -static_cast<double>(i) / std::max(half, 1));
    e(0, i) = std::sin(t * freq);
    e(0, half + i) = std::cos(t * freq);
  }
  return e;
}

CrossAttentionWeights Backbone::cross_attention(const std::string& site_id) const {
  const auto& s = spec_.site(site_id);
  const std::string p = "sites." + s.id + ".";
  return {parameter(p + "w_q"), parameter(p + "w_k"), parameter(p + "w_v"), s.heads};
}

ad::Var Backbone::temporal_mix(const ad::Var& h, int frames, int pixels) const {
  // Reorder rows from (frame, pixel) to (pixel, frame) so that each pixel's
  // frames form one attention group.
  std::vector<int> to_pixel_major(static_cast<std::size_t>(frames) * pixels);
  std::vector<int> to_frame_major(to_pixel_major.size());
  for (int p = 0; p < pixels; ++p)
    for (int t = 0; t < frames; ++t) {
      to_pixel_major[p * frames + t] = t * pixels + p;
      to_frame_major[t * pixels + p] = p * frames + t;
    }
  const std::string p = std::string(kTemporalLayerId) + ".";
  ad::Var seq = ad::gather_rows(h, to_pixel_major);
  ad::Var q = ad::matmul(seq, ad::Var::constant(parameter(p + "w_q")));
  ad::Var k = ad::matmul(seq, ad::Var::constant(parameter(p + "w_k")));
  ad::Var v = ad::matmul(seq, ad::Var::constant(parameter(p + "w_v")));
  ad::Var mixed = ad::attention(q, k, v, pixels, spec_.temporal_heads);
  ad::Var back = ad::gather_rows(ad::matmul(mixed, ad::Var::constant(parameter(p + "w_o"))), to_frame_major);
  return ad::add(h, back);
}

ad::Var Backbone::forward(const LatentVideo& z_t, int t, const Matrix& text, const ad::Var* face_tokens,
                          const AdapterVars* adapter, double lambda) const {
  if (z_t.channels != spec_.channels || z_t.height != spec_.height || z_t.width != spec_.width)
    throw ShapeError("predict_noise: latent [" + std::to_string(z_t.frames) + "x" + std::to_string(z_t.channels) +
                     "x" + std::to_string(z_t.height) + "x" + std::to_string(z_t.width) +
                     "] does not match the backbone spec");
  if (t < 0 || t >= schedule_.n_steps()) throw ArgumentError("timestep " + std::to_string(t) + " out of range");
  if (text.rows != spec_.n_text || text.cols != spec_.d_ctx)
    throw ShapeError("text context " + text.shape_str() + " does not match backbone [n_text x d_ctx]");
  if (!z_t.all_finite()) throw NumericError("predict_noise: non-finite latent");
  if (face_tokens) {
    if (!adapter) throw ConfigError("predict_noise: face tokens given but no adapter weights");
    if (face_tokens->cols() != spec_.d_ctx)
      throw ShapeError("face tokens width " + std::to_string(face_tokens->cols()) + " != d_ctx " +
                       std::to_string(spec_.d_ctx));
    // Hooks may only sit on cross-attention sites; the temporal layer is never adapted.
    std::vector<std::string> hooked;
    for (const auto& [id, _] : adapter->per_layer) hooked.push_back(id);
    auto sites = spec_.cross_attention_ids();
    std::sort(sites.begin(), sites.end());
    if (hooked != sites) throw ConfigError("adapter hooks do not match the backbone's cross-attention sites");
  }

  const int T = z_t.frames, H = z_t.height, W = z_t.width;
  const Matrix tokens = z_t.to_tokens();
  const ad::Var text_var = ad::Var::constant(text);

  ad::Var eps = ad::Var::constant(skip_coefficient(t) * tokens);
  for (std::size_t si = 0; si < spec_.sites.size(); ++si) {
    const auto& s = spec_.sites[si];
    const std::string p = "sites." + s.id + ".";
    const int f = s.downsample;
    const ad::Var x = ad::Var::constant(pool_tokens(tokens, T, H, W, f));
    const Matrix temb = matmul(time_embedding(t, s.d_model), parameter(p + "w_time"));

    ad::Var h0 = ad::add_row(ad::matmul(x, ad::Var::constant(parameter(p + "w_in"))), ad::Var::constant(temb));
    const CrossAttentionVars attn{ad::Var::constant(parameter(p + "w_q")), ad::Var::constant(parameter(p + "w_k")),
                                  ad::Var::constant(parameter(p + "w_v")), s.heads};
    const ImageProjectionVars* proj = nullptr;
    if (face_tokens) proj = &adapter->per_layer.at(s.id);
    ad::Var z_new = decoupled_cross_attention(h0, text_var, face_tokens, attn, proj, lambda);
    ad::Var h1 = ad::add(h0, ad::matmul(z_new, ad::Var::constant(parameter(p + "w_o"))));
    if (static_cast<int>(si) == spec_.temporal_after) h1 = temporal_mix(h1, T, (H / f) * (W / f));
    ad::Var out = ad::matmul(h1, ad::Var::constant(parameter(p + "w_out")));
    if (f != 1) out = ad::gather_rows(out, upsample_index(T, H, W, f));
    eps = ad::add(eps, out);
  }
  return eps;
}

LatentVideo forward_diffuse(const LatentVideo& z, int t, const LatentVideo& eps, const NoiseSchedule& sched) {
  if (!z.same_shape(eps)) throw ShapeError("forward_diffuse: noise shape differs from latent shape");
  if (t < 0 || t >= sched.n_steps()) throw ArgumentError("timestep " + std::to_string(t) + " out of range");
  const double a = std::sqrt(sched.alpha_bar(t));
  const double b = std::sqrt(1.0 - sched.alpha_bar(t));
  LatentVideo out = z;
  for (std::size_t i = 0; i < out.z.size(); ++i) out.z[i] = a * z.z[i] + b * eps.z[i];
  return out;
}

LatentVideo predict_noise(const LatentVideo& z_t, int t, const ConditionBundle& cond, const Backbone& backbone,
                          const AdapterWeights* adapter, double lambda) {
  if (cond.face_tokens && !adapter) throw ConfigError("predict_noise: face tokens given but no adapter weights");
  if (cond.null_text && !bitwise_equal(cond.text_embedding, backbone.null_text()))
    throw ArgumentError("predict_noise: null_text bundle does not carry the null embedding");
  std::optional<AdapterVars> vars;
  std::optional<ad::Var> face;
  if (cond.face_tokens) {
    adapter->validate(backbone.spec());
    if (!cond.face_tokens->tokens.all_finite()) throw NumericError("predict_noise: non-finite face tokens");
    vars = AdapterVars::from(*adapter, false);
    face = ad::Var::constant(cond.face_tokens->tokens);
  }
  ad::Var eps = backbone.forward(z_t, t, cond.text_embedding, face ? &*face : nullptr, vars ? &*vars : nullptr, lambda);
  return LatentVideo::from_tokens(eps.value(), z_t.frames, z_t.channels, z_t.height, z_t.width);
}

NoisePredictor make_predictor(const Backbone& backbone, const AdapterWeights* adapter, double lambda) {
  return [&backbone, adapter, lambda](const LatentVideo& z_t, int t, const ConditionBundle& cond) {
    return predict_noise(z_t, t, cond, backbone, adapter, lambda);
  };
}

}  // namespace idkit
