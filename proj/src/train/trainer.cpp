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

#include "idkit/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <cmath>
#include <fstream>
#include <regex>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "idkit/adapter/checkpoint.hpp"
#include "idkit/core/error.hpp"
#include "idkit/core/fileio.hpp"
#include "idkit/core/hash.hpp"
#include "idkit/core/rng.hpp"
#include "idkit/dataset/pipeline.hpp"
#include "idkit/diffusion/vae.hpp"
#include "idkit/io/image_io.hpp"

namespace idkit {

namespace {

enum Purpose : std::uint64_t {
  kRecord = 0x7265636f,
  kTimestep = 0x74696d65,
  kNoise = 0x6e6f6973,
  kReference = 0x72656665,
  kDropout = 0x64726f70,
  kFaceDropout = 0x66616365,
};

}  // namespace

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be finite and >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(null_text_prob >= 0.0 && null_text_prob <= 1.0)) throw ConfigError("null_text_prob must be in [0, 1]");
  if (!(face_dropout_prob >= 0.0 && face_dropout_prob <= 1.0))
    throw ConfigError("face_dropout_prob must be in [0, 1]");
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (checkpoint_every < 1) throw ConfigError("checkpoint_every must be >= 1");
  if (!(lambda_train >= 0.0)) throw ConfigError("lambda_train must be >= 0");
  if (max_bad_steps < 1) throw ConfigError("max_bad_steps must be >= 1");
}

json TrainConfig::to_json() const {
  return {{"lr", lr},
          {"batch_size", batch_size},
          {"null_text_prob", null_text_prob},
          {"face_dropout_prob", face_dropout_prob},
          {"steps", steps},
          {"seed", seed},
          {"checkpoint_every", checkpoint_every},
          {"lambda_train", lambda_train},
          {"max_bad_steps", max_bad_steps}};
}

TrainConfig TrainConfig::from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  try {
    c.lr = j.value("lr", c.lr);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.null_text_prob = j.value("null_text_prob", c.null_text_prob);
    c.face_dropout_prob = j.value("face_dropout_prob", c.face_dropout_prob);
    c.steps = j.value("steps", c.steps);
    c.seed = j.value("seed", c.seed);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.lambda_train = j.value("lambda_train", c.lambda_train);
    c.max_bad_steps = j.value("max_bad_steps", c.max_bad_steps);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

json TrainStepRecord::to_json() const {
  return {{"step", step},           {"loss", loss},           {"ref_crop_ids", ref_crop_ids},
          {"null_text", null_text}, {"grad_norm", grad_norm}, {"wall_time", wall_time}};
}

TrainStepRecord TrainStepRecord::from_json(const json& j) {
  TrainStepRecord r;
  r.step = j.at("step").get<int>();
  r.loss = j.at("loss").get<double>();
  r.ref_crop_ids = j.at("ref_crop_ids").get<std::vector<std::string>>();
  r.null_text = j.at("null_text").get<std::vector<bool>>();
  r.grad_norm = j.at("grad_norm").get<double>();
  r.wall_time = j.value("wall_time", 0.0);
  return r;
}

bool TrainStepRecord::same_result(const TrainStepRecord& o) const {
  return step == o.step && loss == o.loss && ref_crop_ids == o.ref_crop_ids && null_text == o.null_text &&
         grad_norm == o.grad_norm;
}

TrainingData load_training_data(const fs::path& manifest, const fs::path& root, const Backbone& backbone,
                                const FeatureExtractor& extractor) {
  const auto records = read_manifest(manifest, root);
  const BackboneSpec& spec = backbone.spec();
  const ToyVae vae(spec.channels, spec.vae_factor);
  TrainingData data;
  for (const auto& r : records) {
    if (r.unified_caption.empty())
      throw ConfigError(r.video_id + ": no unified caption; caption the manifest before training");
    FacePool pool = load_pool(root / r.face_pool_path);
    if (pool.empty()) {
      spdlog::warn("{}: empty face pool, skipping", r.video_id);
      continue;
    }
    const Video clip = read_clip(root / r.clip_path);
    LatentVideo z = vae.encode(clip);
    if (z.frames != spec.frames || z.height != spec.height || z.width != spec.width)
      throw ShapeError(fmt::format("{}: clip {}x{}x{} does not match the backbone's {} frames of {}x{} latents",
                                   r.video_id, clip.frames, clip.height, clip.width, spec.frames,
                                   spec.height, spec.width));
    std::vector<ImageFeatures> refs;
    for (std::size_t k = 0; k < pool.crops.size(); ++k)
      refs.push_back(extract_image_features(pool.crops[k], extractor, fmt::format("{}/crop_{}", r.video_id, k)));
    data.video_ids.push_back(r.video_id);
    data.latents.push_back(std::move(z));
    data.text.push_back(backbone.encode_text(r.unified_caption));
    data.references.push_back(std::move(refs));
  }
  if (data.video_ids.empty()) throw ConfigError("manifest has no trainable records");
  return data;
}

std::vector<TrainingExample> make_batch(const TrainingData& data, const Backbone& backbone, int step,
                                        const TrainConfig& config) {
  if (data.video_ids.empty()) throw ArgumentError("make_batch: no records");
  const auto n_steps = backbone.schedule().n_steps();
  std::vector<TrainingExample> batch;
  batch.reserve(static_cast<std::size_t>(config.batch_size));
  for (int b = 0; b < config.batch_size; ++b) {
    const auto s = static_cast<std::uint64_t>(step), slot = static_cast<std::uint64_t>(b);
    Rng rec_rng = make_rng(config.seed, {kRecord, s, slot});
    Rng t_rng = make_rng(config.seed, {kTimestep, s, slot});
    Rng noise_rng = make_rng(config.seed, {kNoise, s, slot});
    Rng ref_rng = make_rng(config.seed, {kReference, s, slot});
    Rng drop_rng = make_rng(config.seed, {kDropout, s, slot});
    Rng face_rng = make_rng(config.seed, {kFaceDropout, s, slot});

    const auto i = static_cast<std::size_t>(uniform_index(rec_rng, static_cast<int>(data.video_ids.size())));
    const LatentVideo& z = data.latents[i];
    TrainingExample ex;
    ex.z = z;
    ex.t = uniform_index(t_rng, n_steps);
    ex.eps = LatentVideo::randn(z.frames, z.channels, z.height, z.width, noise_rng);
    const int k = sample_random_reference(data.references[i].size(), ref_rng);
    ex.ref_id = fmt::format("{}/crop_{}", data.video_ids[i], k);
    ex.null_text = uniform01(drop_rng) < config.null_text_prob;
    ex.text = ex.null_text ? backbone.null_text() : data.text[i];
    if (!(config.face_dropout_prob > 0.0 && uniform01(face_rng) < config.face_dropout_prob))
      ex.reference = data.references[i][static_cast<std::size_t>(k)];
    batch.push_back(std::move(ex));
  }
  return batch;
}

AdamState AdamState::zeros_like(const AdapterWeights& w) {
  AdamState s;
  w.for_each([&](const std::string& name, const Matrix& m) {
    s.m[name] = Matrix(m.rows, m.cols);
    s.v[name] = Matrix(m.rows, m.cols);
  });
  return s;
}

namespace {

constexpr char kOptMagic[8] = {'I', 'D', 'K', 'O', 'P', 'T', '1', '\0'};

}  // namespace

void AdamState::save(const fs::path& path) const {
  json index = json::array();
  std::vector<unsigned char> payload;
  auto put = [&](const Matrix& mat) {
    const auto* p = reinterpret_cast<const unsigned char*>(mat.data.data());
    payload.insert(payload.end(), p, p + mat.data.size() * sizeof(double));
  };
  for (const auto& [name, mat] : m) {
    const Matrix& vv = v.at(name);
    index.push_back({{"name", name}, {"shape", {mat.rows, mat.cols}}});
    put(mat);
    put(vv);
  }
  const std::string header = json{{"step", step}, {"tensors", index}, {"data_fnv1a", hex64(fnv1a(payload))}}.dump();
  std::vector<unsigned char> out(kOptMagic, kOptMagic + 8);
  const std::uint64_t n = header.size();
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(n >> (8 * i)));
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), payload.begin(), payload.end());
  write_atomic(path, out);
}

AdamState AdamState::load(const fs::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kOptMagic, 8) != 0)
    throw CheckpointError(path.string() + ": not an optimizer state file");
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(bytes[8 + i]) << (8 * i);
  if (16 + n > bytes.size()) throw TruncatedCheckpointError(path.string() + ": truncated header");
  const json header = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(n));
  const std::vector<unsigned char> payload(bytes.begin() + 16 + static_cast<std::ptrdiff_t>(n), bytes.end());
  AdamState s;
  s.step = header.at("step").get<int>();
  std::size_t off = 0;
  auto take = [&](int rows, int cols) {
    Matrix mat(rows, cols);
    const std::size_t nb = mat.data.size() * sizeof(double);
    if (off + nb > payload.size()) throw TruncatedCheckpointError(path.string() + ": truncated payload");
    std::memcpy(mat.data.data(), payload.data() + off, nb);
    off += nb;
    return mat;
  };
  for (const auto& t : header.at("tensors")) {
    const int rows = t.at("shape")[0].get<int>(), cols = t.at("shape")[1].get<int>();
    const auto name = t.at("name").get<std::string>();
    s.m[name] = take(rows, cols);
    s.v[name] = take(rows, cols);
  }
  if (off != payload.size()) throw CheckpointError(path.string() + ": trailing bytes");
  if (hex64(fnv1a(payload)) != header.at("data_fnv1a").get<std::string>())
    throw CheckpointError(path.string() + ": checksum mismatch");
  return s;
}

TrainStepRecord train_step(const std::vector<TrainingExample>& batch, AdapterWeights& weights, AdamState& opt,
                           const TrainConfig& config, const Backbone& backbone) {
  const auto started = std::chrono::steady_clock::now();
  const AdapterVars vars = AdapterVars::from(weights, true);
  const auto named = vars.named();
  if (named.size() != opt.m.size()) throw ArgumentError("optimizer state does not match the adapter parameters");

  const ad::Var loss = training_loss(batch, backbone, &vars, &weights.config, config.lambda_train);
  const double loss_value = loss.value()(0, 0);
  if (!std::isfinite(loss_value)) throw NumericError(fmt::format("non-finite loss {}", loss_value));

  // Only adapter tensors may be reachable as trainable leaves.
  for (const ad::Var& leaf : ad::trainable_leaves(loss)) {
    const bool ours = std::any_of(named.begin(), named.end(), [&](const auto& p) { return p.second.same_node(leaf); });
    if (!ours) throw Error("gradient reached a tensor outside the adapter");
  }
  ad::backward(loss);

  double sq = 0.0;
  for (const auto& [name, var] : named)
    for (double g : var.grad().data) sq += g * g;
  const double grad_norm = std::sqrt(sq);
  if (!std::isfinite(grad_norm)) throw NumericError("non-finite gradient norm");

  opt.step += 1;
  const double c1 = 1.0 - std::pow(kAdamBeta1, opt.step);
  const double c2 = 1.0 - std::pow(kAdamBeta2, opt.step);
  std::size_t idx = 0;
  weights.for_each([&](const std::string& name, Matrix& p) {
    const auto& [vname, var] = named[idx++];
    if (vname != name) throw Error("adapter parameter order changed");
    const Matrix& g = var.grad();
    Matrix& m = opt.m.at(name);
    Matrix& v = opt.v.at(name);
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      m.data[i] = kAdamBeta1 * m.data[i] + (1.0 - kAdamBeta1) * g.data[i];
      v.data[i] = kAdamBeta2 * v.data[i] + (1.0 - kAdamBeta2) * g.data[i] * g.data[i];
      const double mhat = m.data[i] / c1;
      const double vhat = v.data[i] / c2;
      p.data[i] -= config.lr * mhat / (std::sqrt(vhat) + kAdamEps);
    }
    round_to_float(p);
  });

  TrainStepRecord rec;
  rec.step = opt.step;
  rec.loss = loss_value;
  rec.grad_norm = grad_norm;
  for (const auto& ex : batch) {
    rec.ref_crop_ids.push_back(ex.reference ? ex.ref_id : "");
    rec.null_text.push_back(ex.null_text);
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

fs::path checkpoint_path(const fs::path& out_dir, int step) {
  return out_dir / "checkpoints" / fmt::format("step_{}.ckpt", step);
}

std::optional<int> latest_checkpoint_step(const fs::path& out_dir) {
  const auto dir = out_dir / "checkpoints";
  if (!fs::is_directory(dir)) return std::nullopt;
  static const std::regex re(R"(step_(\d+)\.ckpt)");
  std::optional<int> best;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = e.path().filename().string();
    if (!std::regex_match(name, m, re)) continue;
    auto opt = e.path();
    opt.replace_extension(".opt");
    if (!fs::exists(opt)) continue;
    const int s = std::stoi(m[1].str());
    if (!best || s > *best) best = s;
  }
  return best;
}

namespace {

void save_training_state(const fs::path& out_dir, int step, const AdapterWeights& w, const AdamState& opt,
                         const Backbone& backbone, const TrainConfig& config) {
  fs::create_directories(out_dir / "checkpoints");
  auto path = checkpoint_path(out_dir, step);
  auto opt_path = path;
  opt_path.replace_extension(".opt");
  opt.save(opt_path);
  save_adapter(w, backbone.spec(), path, {{"step", step}, {"train_config", config.to_json()}});
}

void load_training_state(const fs::path& out_dir, int step, const Backbone& backbone, AdapterWeights& w,
                         AdamState& opt) {
  auto path = checkpoint_path(out_dir, step);
  auto opt_path = path;
  opt_path.replace_extension(".opt");
  w = load_adapter(path, backbone.spec());
  opt = AdamState::load(opt_path);
  if (opt.step != step) throw CheckpointError(opt_path.string() + ": step does not match the checkpoint");
}

// Keeps metrics lines for steps <= `step`.
void truncate_metrics(const fs::path& path, int step) {
  if (!fs::exists(path)) return;
  std::ifstream in(path);
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (json::parse(line).at("step").get<int>() <= step) kept += line + "\n";
  }
  write_atomic(path, kept);
}

}  // namespace

TrainResult train_loop(const TrainingData& data, const Backbone& backbone, const AdapterConfig& adapter_config,
                       const TrainConfig& config, const TrainLoopOptions& options) {
  config.validate();
  if (options.out_dir.empty()) throw ConfigError("train_loop: out_dir is required");
  fs::create_directories(options.out_dir);
  const std::uint64_t backbone_before = backbone.checksum();
  const fs::path metrics_path = options.out_dir / "metrics.jsonl";

  TrainResult result;
  AdamState opt;
  int last_saved = 0;
  if (options.resume) {
    std::optional<int> step;
    if (*options.resume == "latest") {
      step = latest_checkpoint_step(options.out_dir);
      if (!step) throw CheckpointError("no checkpoint to resume under " + options.out_dir.string());
    } else {
      step = std::stoi(*options.resume);
    }
    load_training_state(options.out_dir, *step, backbone, result.weights, opt);
    truncate_metrics(metrics_path, *step);
    last_saved = *step;
    spdlog::info("resumed from step {}", *step);
  } else {
    result.weights = init_adapter(backbone.spec(), adapter_config);
    opt = AdamState::zeros_like(result.weights);
    save_training_state(options.out_dir, 0, result.weights, opt, backbone, config);
    write_atomic(metrics_path, std::string());
  }
  result.final_checkpoint = checkpoint_path(options.out_dir, last_saved);

  std::ofstream metrics(metrics_path, std::ios::app);
  const int end = options.stop_after >= 0 ? std::min(config.steps, options.stop_after) : config.steps;
  int consecutive_bad = 0;
  int step = opt.step;
  while (step < end) {
    const auto batch = make_batch(data, backbone, step, config);
    try {
      TrainStepRecord rec = train_step(batch, result.weights, opt, config, backbone);
      consecutive_bad = 0;
      metrics << rec.to_json().dump() << "\n" << std::flush;
      result.records.push_back(std::move(rec));
    } catch (const NumericError& e) {
      ++result.bad_steps;
      ++consecutive_bad;
      json diag{{"step", step}, {"error", e.what()}, {"ref_crop_ids", json::array()}, {"t", json::array()}};
      for (const auto& ex : batch) {
        diag["ref_crop_ids"].push_back(ex.ref_id);
        diag["t"].push_back(ex.t);
      }
      fs::create_directories(options.out_dir / "diagnostics");
      write_json(options.out_dir / "diagnostics" / fmt::format("step_{}.json", step), diag);
      spdlog::error("step {}: {}", step, e.what());
      if (consecutive_bad >= config.max_bad_steps) {
        spdlog::warn("reloading checkpoint step_{}", last_saved);
        load_training_state(options.out_dir, last_saved, backbone, result.weights, opt);
        consecutive_bad = 0;
      }
      // Skip the poisoned batch; the counter doubles as the batch index.
      opt.step = step + 1;
      step = opt.step;
      continue;
    }
    step = opt.step;
    if (step % config.checkpoint_every == 0 || step == config.steps) {
      save_training_state(options.out_dir, step, result.weights, opt, backbone, config);
      last_saved = step;
      result.final_checkpoint = checkpoint_path(options.out_dir, step);
    }
  }
  if (backbone.checksum() != backbone_before) throw Error("backbone parameters changed during training");
  return result;
}

}  // namespace idkit
