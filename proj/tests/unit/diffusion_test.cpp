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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "idkit/adapter/weights.hpp"
#include "idkit/core/error.hpp"
#include "idkit/diffusion/backbone.hpp"
#include "idkit/diffusion/generation.hpp"
#include "idkit/diffusion/loss.hpp"
#include "idkit/diffusion/sampler.hpp"
#include "idkit/diffusion/schedule.hpp"
#include "idkit/diffusion/vae.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace idkit {
namespace {

using testing::active_adapter;
using testing::random_batch;
using testing::random_latent;
using testing::random_matrix;
using testing::single_branch_sample;



// Schedule

TEST(Schedule, LinearIsMonotoneAndInRange) {
  const auto s = NoiseSchedule::linear(1000, 1e-4, 0.02);
  ASSERT_EQ(s.n_steps(), 1000);
  EXPECT_GT(s.alpha_bar(0), s.alpha_bar(999));
  EXPECT_NEAR(s.alpha_bar(0), 1.0 - 1e-4, 1e-15);
  for (int t = 1; t < 1000; ++t) {
    EXPECT_LE(s.alpha_bar(t), s.alpha_bar(t - 1));
    EXPECT_GT(s.alpha_bar(t), 0.0);
    EXPECT_NEAR(s.alpha_bar(t), s.alpha_bar(t - 1) * (1.0 - s.beta(t)), 1e-15);
  }
  EXPECT_THROW(NoiseSchedule::from_betas({0.5, 1.0}), ArgumentError);
  EXPECT_THROW(NoiseSchedule::from_betas({}), ArgumentError);
}

TEST(ForwardDiffuse, LimitsAndArithmetic) {
  const auto s = NoiseSchedule::linear(1000, 1e-4, 0.02);
  const LatentVideo z = random_latent(2, 3, 4, 4, 1), eps = random_latent(2, 3, 4, 4, 2);
  double zmax = 0.0, emax = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    zmax = std::max(zmax, std::abs(z.z[i]));
    emax = std::max(emax, std::abs(eps.z[i]));
  }
  const double bound = (1.0 - std::sqrt(s.alpha_bar(0))) * zmax + std::sqrt(1.0 - s.alpha_bar(0)) * emax;
  EXPECT_LE(max_abs_diff(forward_diffuse(z, 0, eps, s), z), bound + 1e-15);

  const auto nearly_clean = NoiseSchedule::from_betas({1e-14, 0.5});
  EXPECT_LE(max_abs_diff(forward_diffuse(z, 0, eps, nearly_clean), z), 1e-6);

  LatentVideo zero_eps(2, 3, 4, 4);
  const LatentVideo zt = forward_diffuse(z, 500, zero_eps, s);
  const double a = std::sqrt(s.alpha_bar(500));
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(zt.z[i], a * z.z[i]);

  // alpha_bar = 0.75 gives sqrt(0.25) = 0.5 on a unit noise tensor.
  const auto quarter = NoiseSchedule::from_betas({0.25});
  const LatentVideo half = forward_diffuse(LatentVideo(1, 2, 2, 2), 0, LatentVideo(1, 2, 2, 2, 1.0), quarter);
  for (double v : half.z) EXPECT_DOUBLE_EQ(v, 0.5);

  EXPECT_THROW(forward_diffuse(z, 0, LatentVideo(1, 1, 1, 1), s), ShapeError);
  EXPECT_THROW(forward_diffuse(z, 1000, eps, s), ArgumentError);
}

TEST(ForwardDiffuse, VariancePreservedAtEveryStep) {
  const auto s = NoiseSchedule::linear(1000, 1e-4, 0.02);
  const int n = 10000;
  const LatentVideo z = random_latent(1, 1, 100, 100, 3), eps = random_latent(1, 1, 100, 100, 4);
  for (int t = 0; t < s.n_steps(); ++t) {
    const LatentVideo zt = forward_diffuse(z, t, eps, s);
    double mean = 0.0, sq = 0.0;
    for (double v : zt.z) mean += v;
    mean /= n;
    for (double v : zt.z) sq += (v - mean) * (v - mean);
    const double var = sq / (n - 1);
    ASSERT_NEAR(var, 1.0, 0.05) << "t=" << t;
  }
}

// Backbone

BackboneSpec tiny_spec() {
  BackboneSpec s;
  s.channels = 4;
  s.frames = 2;
  s.height = s.width = 8;
  s.d_ctx = 4;
  s.n_text = 3;
  s.sites = {{"s0", 1, 4, 4, 1}};
  s.temporal_after = 0;
  s.n_steps = 100;
  s.weight_seed = 3;
  return s;
}

// Forward pass of a single-site spec written as plain loops over the
// backbone's stored parameters.
LatentVideo straight_line_eps(const Backbone& bb, const LatentVideo& zt, int t, const Matrix& text,
                              const Matrix* face, const LayerProjection* proj, double lambda) {
  const auto& spec = bb.spec();
  const int T = zt.frames, H = zt.height, W = zt.width, C = zt.channels, D = spec.sites[0].d_model;
  const auto P = [&](const char* n) -> const Matrix& { return bb.parameter(std::string("sites.s0.") + n); };
  const auto TP = [&](const char* n) -> const Matrix& { return bb.parameter(std::string("temporal.") + n); };
  const double skip = std::sqrt(1.0 - bb.schedule().alpha_bar(t));

  std::vector<double> te(D, 0.0), temb(D, 0.0);
  for (int i = 0; i < D / 2; ++i) {
    const double freq = std::pow(10000.0, -static_cast<double>(i) / (D / 2));
    te[i] = std::sin(t * freq);
    te[D / 2 + i] = std::cos(t * freq);
  }
  for (int j = 0; j < D; ++j)
    for (int i = 0; i < D; ++i) temb[j] += te[i] * P("w_time")(i, j);

  auto attend = [](const std::vector<double>& q, const std::vector<std::vector<double>>& k,
                   const std::vector<std::vector<double>>& v) {
    std::vector<double> s(k.size());
    double mx = -INFINITY, z = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) {
      double d = 0.0;
      for (std::size_t c = 0; c < q.size(); ++c) d += q[c] * k[j][c];
      s[j] = d / std::sqrt(static_cast<double>(q.size()));
      mx = std::max(mx, s[j]);
    }
    for (double& x : s) z += (x = std::exp(x - mx));
    std::vector<double> out(v[0].size(), 0.0);
    for (std::size_t j = 0; j < k.size(); ++j)
      for (std::size_t c = 0; c < out.size(); ++c) out[c] += s[j] / z * v[j][c];
    return out;
  };
  auto row_times = [](const std::vector<double>& x, const Matrix& m) {
    std::vector<double> out(m.cols, 0.0);
    for (int j = 0; j < m.cols; ++j)
      for (int i = 0; i < m.rows; ++i) out[j] += x[i] * m(i, j);
    return out;
  };
  auto rows_times = [&](const Matrix& x, const Matrix& m) {
    std::vector<std::vector<double>> out;
    for (int r = 0; r < x.rows; ++r) out.push_back(row_times(std::vector<double>(x.row(r).begin(), x.row(r).end()), m));
    return out;
  };

  const auto kt = rows_times(text, P("w_k")), vt = rows_times(text, P("w_v"));
  std::vector<std::vector<double>> ki, vi;
  if (face && lambda != 0.0) {
    ki = rows_times(*face, proj->w_k_img);
    vi = rows_times(*face, proj->w_v_img);
  }

  // h1 per (frame, pixel)
  std::vector<std::vector<double>> h1(static_cast<std::size_t>(T) * H * W);
  for (int f = 0; f < T; ++f)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        std::vector<double> px(C);
        for (int c = 0; c < C; ++c) px[c] = zt.at(f, c, y, x);
        std::vector<double> h0 = row_times(px, P("w_in"));
        for (int j = 0; j < D; ++j) h0[j] += temb[j];
        const auto q = row_times(h0, P("w_q"));
        auto a = attend(q, kt, vt);
        if (!ki.empty()) {
          const auto b = attend(q, ki, vi);
          for (std::size_t c = 0; c < a.size(); ++c) a[c] += lambda * b[c];
        }
        const auto o = row_times(a, P("w_o"));
        for (int j = 0; j < D; ++j) h0[j] += o[j];
        h1[(f * H + y) * W + x] = h0;
      }

  LatentVideo eps(T, C, H, W);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      std::vector<std::vector<double>> seq, q, k, v;
      for (int f = 0; f < T; ++f) seq.push_back(h1[(f * H + y) * W + x]);
      for (const auto& s : seq) {
        q.push_back(row_times(s, TP("w_q")));
        k.push_back(row_times(s, TP("w_k")));
        v.push_back(row_times(s, TP("w_v")));
      }
      for (int f = 0; f < T; ++f) {
        auto mixed = row_times(attend(q[f], k, v), TP("w_o"));
        for (int j = 0; j < D; ++j) mixed[j] += seq[f][j];
        const auto out = row_times(mixed, P("w_out"));
        for (int c = 0; c < C; ++c) eps.at(f, c, y, x) = skip * zt.at(f, c, y, x) + out[c];
      }
    }
  return eps;
}

TEST(Backbone, MatchesStraightLineOracle) {
  const BackboneSpec spec = tiny_spec();
  const Backbone bb(spec);
  const LatentVideo zt = random_latent(2, 4, 8, 8, 5);
  const Matrix text = bb.encode_text("a person smiling");
  const LatentVideo got = predict_noise(zt, 37, ConditionBundle{text, std::nullopt, false}, bb, nullptr, 1.0);
  const LatentVideo want = straight_line_eps(bb, zt, 37, text, nullptr, nullptr, 0.0);
  EXPECT_LE(max_abs_diff(got, want), 1e-10);

  const AdapterWeights adapter = active_adapter(spec, 8);
  std::mt19937_64 g(2);
  FaceTokens face{random_matrix(3, spec.d_ctx, g), {}};
  const LatentVideo got_face = predict_noise(zt, 37, ConditionBundle{text, face, false}, bb, &adapter, 0.7);
  const LatentVideo want_face =
      straight_line_eps(bb, zt, 37, text, &face.tokens, &adapter.per_layer.at("s0"), 0.7);
  EXPECT_LE(max_abs_diff(got_face, want_face), 1e-10);
  EXPECT_GT(max_abs_diff(got_face, got), 1e-6);
}

TEST(Backbone, LambdaZeroAndMissingFaceAreBitwiseFrozenPrediction) {
  const BackboneSpec spec = BackboneSpec::ci();
  const Backbone bb(spec);
  const AdapterWeights adapter = active_adapter(spec, 4);
  std::mt19937_64 g(6);
  for (int trial = 0; trial < 5; ++trial) {
    const LatentVideo zt = random_latent(spec.frames, spec.channels, spec.height, spec.width, 10 + trial);
    const Matrix text = bb.encode_text("prompt " + std::to_string(trial));
    const int t = 100 * trial + 7;
    FaceTokens face{random_matrix(adapter.config.n_queries, spec.d_ctx, g), {}};
    const LatentVideo base = predict_noise(zt, t, ConditionBundle{text, std::nullopt, false}, bb, nullptr, 1.0);
    EXPECT_TRUE(bitwise_equal(predict_noise(zt, t, ConditionBundle{text, face, false}, bb, &adapter, 0.0), base));
    EXPECT_TRUE(bitwise_equal(predict_noise(zt, t, ConditionBundle{text, std::nullopt, false}, bb, &adapter, 1.0), base));
    EXPECT_TRUE(bitwise_equal(predict_noise(zt, t, ConditionBundle{text, std::nullopt, false}, bb, nullptr, 1.0), base));
  }
}

TEST(Backbone, ErrorsAndIsolation) {
  const BackboneSpec spec = BackboneSpec::ci();
  const Backbone bb(spec);
  const LatentVideo zt = random_latent(spec.frames, spec.channels, spec.height, spec.width, 1);
  FaceTokens face{Matrix(16, spec.d_ctx), {}};
  const Matrix text = bb.encode_text("x");
  EXPECT_THROW(predict_noise(zt, 3, ConditionBundle{text, face, false}, bb, nullptr, 1.0), ConfigError);

  // A hook on the temporal layer (or anywhere but the cross-attention sites) is refused.
  AdapterWeights adapter = active_adapter(spec, 1);
  adapter.per_layer[kTemporalLayerId] = adapter.per_layer.begin()->second;
  EXPECT_THROW(predict_noise(zt, 3, ConditionBundle{text, face, false}, bb, &adapter, 1.0), ConfigError);

  EXPECT_THROW(predict_noise(random_latent(1, 3, 8, 8, 1), 3, ConditionBundle{text, std::nullopt, false}, bb, nullptr, 1.0),
               ShapeError);
  EXPECT_THROW(predict_noise(zt, 3, ConditionBundle{text, std::nullopt, true}, bb, nullptr, 1.0), ArgumentError);

  // The adapter never names temporal parameters.
  for (const auto& [name, _] : active_adapter(spec, 1).flatten()) EXPECT_EQ(name.find(kTemporalLayerId), std::string::npos);
}

TEST(Backbone, DeterministicAndChecksumStable) {
  const Backbone a(BackboneSpec::ci()), b(BackboneSpec::ci());
  EXPECT_EQ(a.checksum(), b.checksum());
  const LatentVideo zt = random_latent(8, 4, 8, 8, 2);
  const ConditionBundle cond{a.encode_text("hello"), std::nullopt, false};
  EXPECT_TRUE(bitwise_equal(predict_noise(zt, 5, cond, a, nullptr, 1.0), predict_noise(zt, 5, cond, b, nullptr, 1.0)));
  EXPECT_TRUE(bitwise_equal(a.null_text(), a.encode_text("")));
  EXPECT_FALSE(bitwise_equal(a.encode_text("hello"), a.encode_text("world")));
}

// Loss


TEST(TrainingLoss, PerfectPredictorAndMeanOfOnes) {
  const Backbone bb(BackboneSpec::ci());
  auto batch = random_batch(bb, 3, 1);
  std::map<int, LatentVideo> by_t;
  for (const auto& ex : batch) by_t[ex.t] = ex.eps;
  const NoisePredictor oracle = [&](const LatentVideo&, int t, const ConditionBundle&) { return by_t.at(t); };
  EXPECT_EQ(training_loss(batch, oracle, bb.schedule()), 0.0);

  for (auto& ex : batch) ex.eps = LatentVideo(ex.eps.frames, ex.eps.channels, ex.eps.height, ex.eps.width);
  const NoisePredictor ones = [](const LatentVideo& z, int, const ConditionBundle&) {
    return LatentVideo(z.frames, z.channels, z.height, z.width, 1.0);
  };
  EXPECT_DOUBLE_EQ(training_loss(batch, ones, bb.schedule()), 1.0);
  EXPECT_THROW(training_loss(std::span<const TrainingExample>(), ones, bb.schedule()), ArgumentError);
}

TEST(TrainingLoss, MatchesHandSummedMean) {
  const Backbone bb(BackboneSpec::ci());
  const auto batch = random_batch(bb, 2, 2);
  double total = 0.0;
  for (const auto& ex : batch) {
    const LatentVideo zt = forward_diffuse(ex.z, ex.t, ex.eps, bb.schedule());
    const LatentVideo pred = predict_noise(zt, ex.t, ConditionBundle{ex.text, std::nullopt, false}, bb, nullptr, 1.0);
    double sq = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sq += (ex.eps.z[i] - pred.z[i]) * (ex.eps.z[i] - pred.z[i]);
    total += sq / static_cast<double>(pred.size());
  }
  const double want = total / 2.0;
  EXPECT_NEAR(training_loss(batch, bb, static_cast<const AdapterWeights*>(nullptr), 1.0), want, 1e-12);
  EXPECT_NEAR(training_loss(batch, make_predictor(bb, nullptr, 1.0), bb.schedule()), want, 1e-12);
  EXPECT_GE(want, 0.0);
}

TEST(TrainingLoss, AdapterGradientsMatchFiniteDifferences) {
  const BackboneSpec spec = BackboneSpec::ci();
  const Backbone bb(spec);
  AdapterWeights w = active_adapter(spec, 12);
  auto batch = random_batch(bb, 2, 3);
  std::mt19937_64 g(4);
  for (auto& ex : batch) ex.reference = ImageFeatures{random_matrix(16, w.config.d_img(), g), "ref"};

  AdapterVars vars = AdapterVars::from(w, true);
  ad::Var loss = training_loss(batch, bb, &vars, &w.config, 1.0);
  ad::backward(loss);
  std::map<std::string, Matrix> grads;
  for (const auto& [name, v] : vars.named()) grads[name] = v.grad();

  const double h = 1e-5;
  int checked = 0;
  for (const auto& [name, grad] : grads) {
    // A handful of entries per tensor keeps this fast.
    for (std::size_t e = 0; e < grad.data.size(); e += std::max<std::size_t>(1, grad.data.size() / 5)) {
      NamedTensors up = w.flatten(), dn = up;
      up[name].data[e] += h;
      dn[name].data[e] -= h;
      const AdapterWeights wu = AdapterWeights::unflatten(w.config, w.d_ctx, up);
      const AdapterWeights wd = AdapterWeights::unflatten(w.config, w.d_ctx, dn);
      const double fd = (training_loss(batch, bb, &wu, 1.0) - training_loss(batch, bb, &wd, 1.0)) / (2 * h);
      const double an = grad.data[e];
      EXPECT_LE(std::abs(an - fd), 1e-4 * std::max(std::abs(fd), std::abs(an)) + 1e-9) << name << "[" << e << "]";
      ++checked;
    }
  }
  EXPECT_GT(checked, 20);
}

// Sampling

TEST(Sampler, TimestepsAndErrors) {
  EXPECT_EQ(sampling_timesteps(1000, 4), (std::vector<int>{0, 250, 500, 750}));
  EXPECT_THROW(sampling_timesteps(10, 11), ArgumentError);
  EXPECT_THROW(sampling_timesteps(10, 0), ArgumentError);
}

TEST(Sampler, TwoStepClosedForm) {
  const double b0 = 0.1, b1 = 0.3, c = 0.25;
  const auto sched = NoiseSchedule::from_betas({b0, b1});
  SamplerSettings st{1, 2, 2, 2, 2, 3.0, 17};
  const NoisePredictor constant = [&](const LatentVideo& z, int, const ConditionBundle&) {
    return LatentVideo(z.frames, z.channels, z.height, z.width, c);
  };
  const ConditionBundle none{Matrix(1, 1), std::nullopt, false};
  const LatentVideo got = cfg_sample(st, none, none, constant, sched);

  const LatentVideo x0 = sampling_initial_noise(st), n1 = sampling_step_noise(st, 1);
  const double ab0 = 1 - b0, ab1 = (1 - b0) * (1 - b1);
  for (std::size_t k = 0; k < got.size(); ++k) {
    double x = (x0.z[k] - b1 / std::sqrt(1 - ab1) * c) / std::sqrt(1 - b1);
    x += std::sqrt(b1 * (1 - ab0) / (1 - ab1)) * n1.z[k];
    x = (x - b0 / std::sqrt(1 - ab0) * c) / std::sqrt(1 - b0);
    EXPECT_NEAR(got.z[k], x, 1e-12);
  }
}


TEST(Sampler, GuidanceScaleCollapses) {
  const BackboneSpec spec = BackboneSpec::ci();
  const Backbone bb(spec);
  const AdapterWeights adapter = active_adapter(spec, 2);
  std::mt19937_64 g(1);
  FaceTokens face{random_matrix(adapter.config.n_queries, spec.d_ctx, g), {}};
  const ConditionBundle cond{bb.encode_text("a person waving"), face, false};
  const ConditionBundle uncond{bb.null_text(), FaceTokens{Matrix(face.tokens.rows, face.tokens.cols), {}}, true};
  const NoisePredictor pred = make_predictor(bb, &adapter, 1.0);
  SamplerSettings st{spec.frames, spec.channels, spec.height, spec.width, 5, 1.0, 99};

  EXPECT_TRUE(bitwise_equal(cfg_sample(st, cond, uncond, pred, bb.schedule()),
                            single_branch_sample(st, cond, pred, bb.schedule())));
  st.guidance_scale = 0.0;
  EXPECT_TRUE(bitwise_equal(cfg_sample(st, cond, uncond, pred, bb.schedule()),
                            single_branch_sample(st, uncond, pred, bb.schedule())));
  st.guidance_scale = 7.5;
  const LatentVideo a = cfg_sample(st, cond, uncond, pred, bb.schedule());
  EXPECT_TRUE(bitwise_equal(a, cfg_sample(st, cond, uncond, pred, bb.schedule())));
  EXPECT_TRUE(a.all_finite());
  st.guidance_scale = -1.0;
  EXPECT_THROW(cfg_sample(st, cond, uncond, pred, bb.schedule()), ArgumentError);
  st.guidance_scale = 1.0;
  st.steps = spec.n_steps + 1;
  EXPECT_THROW(cfg_sample(st, cond, uncond, pred, bb.schedule()), ArgumentError);
}

// Decoder

TEST(ToyVae, CenterRoundTripAndClamp) {
  const ToyVae vae(4, 8);
  const Video gray = vae.decode(LatentVideo(2, 4, 3, 3));
  for (float v : gray.data) EXPECT_EQ(v, 0.5f);

  Rng r = make_rng(3, {});
  LatentVideo z(2, 4, 3, 3);
  for (double& v : z.z) v = (uniform01(r) - 0.5) * 0.4;
  const LatentVideo back = vae.encode(vae.decode(z));
  EXPECT_LT(max_abs_diff(back, z), 1e-6);

  const Video clamped = vae.decode(LatentVideo(1, 4, 1, 1, 100.0));
  for (float v : clamped.data) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

// Generation

TEST(Generation, ConfigJsonRoundTripAndValidation) {
  GenerationConfig c;
  c.prompt = "p";
  c.reference_images = {"a.png", "b.png"};
  c.mix_weights = {0.25, 0.75};
  c.lambda = 0.5;
  c.seed = 3;
  const GenerationConfig back = GenerationConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  c.mix_weights = {1.0};
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(Generation, DegenerateMixAndLambdaZero) {
  const BackboneSpec spec = BackboneSpec::ci();
  const Backbone bb(spec);
  const AdapterWeights adapter = active_adapter(spec, 5);
  const auto ex = make_extractor(adapter.config.extractor);
  Image a(32, 32, 0.2f), b(32, 32, 0.8f);
  for (int y = 8; y < 24; ++y)
    for (int x = 8; x < 24; ++x) a.at(y, x, 0) = 0.9f;

  GenerationConfig cfg;
  cfg.prompt = "a person";
  cfg.frames = spec.frames;
  cfg.steps = 4;
  cfg.seed = 11;
  cfg.reference_images = {"a"};
  std::vector<Image> ra{a}, rab{a, b};
  const Video single = generate(cfg, bb, &adapter, ex.get(), ra).frames;

  cfg.reference_images = {"a", "b"};
  cfg.mix_weights = {1.0, 0.0};
  EXPECT_EQ(generate(cfg, bb, &adapter, ex.get(), rab).frames.data, single.data);
  cfg.mix_weights = {0.5, 0.5};
  EXPECT_NE(generate(cfg, bb, &adapter, ex.get(), rab).frames.data, single.data);

  cfg.reference_images = {"a"};
  cfg.mix_weights.clear();
  cfg.lambda = 0.0;
  const Video lambda0 = generate(cfg, bb, &adapter, ex.get(), ra).frames;
  cfg.reference_images.clear();
  std::vector<Image> none;
  EXPECT_EQ(generate(cfg, bb, nullptr, nullptr, none).frames.data, lambda0.data);
}

}  // namespace
}  // namespace idkit
