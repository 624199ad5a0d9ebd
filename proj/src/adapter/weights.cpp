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

#include "idkit/adapter/weights.hpp"

#include "idkit/core/error.hpp"
#include "idkit/core/hash.hpp"
#include "idkit/core/rng.hpp"

namespace idkit {

void AdapterConfig::validate() const {
  if (n_queries < 1 || d_query < 1 || d_enc < 1 || d_img() < 1) throw ConfigError("adapter dimensions must be positive");
  if (enc_heads < 1 || d_enc % enc_heads) throw ConfigError("encoder heads must divide d_enc");
  if (!std::isfinite(lambda_default) || lambda_default < 0.0) throw ConfigError("lambda_default must be finite and >= 0");
}

nlohmann::json AdapterConfig::to_json() const {
  return {{"n_queries", n_queries}, {"d_query", d_query},     {"d_enc", d_enc},
          {"enc_heads", enc_heads}, {"layer_norm", layer_norm}, {"lambda_default", lambda_default},
          {"seed", seed},           {"extractor", extractor.to_json()}};
}

AdapterConfig AdapterConfig::from_json(const nlohmann::json& j) {
  AdapterConfig c;
  c.n_queries = j.value("n_queries", c.n_queries);
  c.d_query = j.value("d_query", c.d_query);
  c.d_enc = j.value("d_enc", c.d_enc);
  c.enc_heads = j.value("enc_heads", c.enc_heads);
  c.layer_norm = j.value("layer_norm", c.layer_norm);
  c.lambda_default = j.value("lambda_default", c.lambda_default);
  c.seed = j.value("seed", c.seed);
  if (j.contains("extractor")) c.extractor = ExtractorConfig::from_json(j["extractor"]);
  c.validate();
  return c;
}

void AdapterWeights::for_each(const std::function<void(const std::string&, Matrix&)>& fn) {
  fn("latent_queries", latent_queries);
  for (auto& [name, m] : encoder) fn("encoder." + name, m);
  for (auto& [id, p] : per_layer) {
    fn("layers." + id + ".w_k_img", p.w_k_img);
    fn("layers." + id + ".w_v_img", p.w_v_img);
  }
}

void AdapterWeights::for_each(const std::function<void(const std::string&, const Matrix&)>& fn) const {
  const_cast<AdapterWeights*>(this)->for_each([&](const std::string& n, Matrix& m) { fn(n, m); });
}

std::size_t AdapterWeights::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const std::string&, const Matrix& m) { n += m.size(); });
  return n;
}

NamedTensors AdapterWeights::flatten() const {
  NamedTensors out;
  for_each([&](const std::string& n, const Matrix& m) { out[n] = m; });
  return out;
}

namespace {

struct ExpectedTensor {
  std::string name;
  int rows;
  int cols;
};

std::vector<ExpectedTensor> expected_tensors(const BackboneSpec& spec, const AdapterConfig& c) {
  std::vector<ExpectedTensor> out{{"latent_queries", c.n_queries, c.d_query},
                                  {"encoder.w_k", c.d_img(), c.d_enc},
                                  {"encoder.w_out", c.d_enc, spec.d_ctx},
                                  {"encoder.w_q", c.d_query, c.d_enc},
                                  {"encoder.w_v", c.d_img(), c.d_enc}};
  for (const auto& s : spec.sites) {
    out.push_back({"layers." + s.id + ".w_k_img", spec.d_ctx, s.d_attn});
    out.push_back({"layers." + s.id + ".w_v_img", spec.d_ctx, s.d_attn});
  }
  return out;
}

Matrix initial_value(const std::string& name, int rows, int cols, const AdapterConfig& c) {
  Rng rng = make_rng(c.seed, {fnv1a(name)});
  auto ends_with = [&](const char* suffix) { return name.ends_with(suffix); };
  Matrix m;
  if (ends_with(".w_v_img")) {
    m = Matrix(rows, cols);
  } else if (ends_with(".w_k_img")) {
    m = randn(rows, cols, kImageKeyInitStd, rng);
  } else if (name == "latent_queries") {
    m = randn(rows, cols, 1.0, rng);
  } else {
    m = randn(rows, cols, 1.0 / std::sqrt(static_cast<double>(rows)), rng);
  }
  round_to_float(m);
  return m;
}

}  // namespace

AdapterWeights AdapterWeights::unflatten(const AdapterConfig& config, int d_ctx, const NamedTensors& tensors) {
  AdapterWeights w;
  w.config = config;
  w.d_ctx = d_ctx;
  w.lambda_default = config.lambda_default;
  for (const auto& [name, m] : tensors) {
    if (name == "latent_queries") {
      w.latent_queries = m;
    } else if (name.starts_with("encoder.")) {
      w.encoder[name.substr(8)] = m;
    } else if (name.starts_with("layers.")) {
      const auto dot = name.rfind('.');
      if (dot <= 7) throw ConfigError("malformed tensor name '" + name + "'");
      const std::string id = name.substr(7, dot - 7);
      const std::string field = name.substr(dot + 1);
      if (field == "w_k_img")
        w.per_layer[id].w_k_img = m;
      else if (field == "w_v_img")
        w.per_layer[id].w_v_img = m;
      else
        throw ConfigError("unknown layer tensor '" + name + "'");
    } else {
      throw ConfigError("unknown adapter tensor '" + name + "'");
    }
  }
  return w;
}

void AdapterWeights::validate(const BackboneSpec& spec) const {
  if (d_ctx != spec.d_ctx)
    throw ShapeError("adapter d_ctx " + std::to_string(d_ctx) + " != backbone d_ctx " + std::to_string(spec.d_ctx));
  std::vector<std::string> ids;
  for (const auto& [id, _] : per_layer) ids.push_back(id);
  auto expected_ids = spec.cross_attention_ids();
  std::sort(expected_ids.begin(), expected_ids.end());
  if (ids != expected_ids) {
    std::string got, want;
    for (const auto& i : ids) got += " " + i;
    for (const auto& i : expected_ids) want += " " + i;
    throw ConfigError("adapter layers {" + got + " } do not match backbone cross-attention sites {" + want + " }");
  }
  const NamedTensors flat = flatten();
  for (const auto& e : expected_tensors(spec, config)) {
    auto it = flat.find(e.name);
    if (it == flat.end()) throw ConfigError("adapter is missing tensor '" + e.name + "'");
    if (it->second.rows != e.rows || it->second.cols != e.cols)
      throw ShapeError(e.name + ": expected [" + std::to_string(e.rows) + " x " + std::to_string(e.cols) + "], got " +
                       it->second.shape_str());
    if (!it->second.all_finite()) throw NumericError(e.name + " has non-finite entries");
  }
  if (flat.size() != expected_tensors(spec, config).size()) throw ConfigError("adapter has unexpected tensors");
}

AdapterWeights init_adapter(const BackboneSpec& spec, const AdapterConfig& config,
                            const std::optional<NamedTensors>& donor) {
  spec.validate();
  config.validate();
  const auto expected = expected_tensors(spec, config);

  if (donor) {
    std::vector<std::string> bad;
    for (const auto& [name, m] : *donor) {
      auto it = std::find_if(expected.begin(), expected.end(), [&](const auto& e) { return e.name == name; });
      if (it == expected.end()) {
        bad.push_back(name + " (unknown)");
      } else if (m.rows != it->rows || m.cols != it->cols) {
        bad.push_back(name + " (expected [" + std::to_string(it->rows) + " x " + std::to_string(it->cols) + "], got " +
                      m.shape_str() + ")");
      } else if (!float_representable(m) || !m.all_finite()) {
        bad.push_back(name + " (not finite float32)");
      }
    }
    if (!bad.empty()) {
      std::string msg = "donor tensors rejected:";
      for (const auto& b : bad) msg += " " + b + ";";
      throw ShapeError(msg);
    }
  }

  NamedTensors tensors;
  for (const auto& e : expected) {
    if (donor && donor->count(e.name))
      tensors[e.name] = donor->at(e.name);
    else
      tensors[e.name] = initial_value(e.name, e.rows, e.cols, config);
  }
  AdapterWeights w = AdapterWeights::unflatten(config, spec.d_ctx, tensors);
  w.validate(spec);
  return w;
}

}  // namespace idkit
