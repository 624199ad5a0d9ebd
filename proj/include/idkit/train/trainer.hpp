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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "idkit/adapter/extractor.hpp"
#include "idkit/adapter/weights.hpp"
#include "idkit/dataset/types.hpp"
#include "idkit/diffusion/backbone.hpp"
#include "idkit/diffusion/loss.hpp"

namespace idkit {

struct TrainConfig {
  double lr = 1e-4;
  int batch_size = 2;
  double null_text_prob = 0.2;
  double face_dropout_prob = 0.0;  // independent face-token dropout, off by default
  int steps = 200;
  std::uint64_t seed = 0;
  int checkpoint_every = 25;
  double lambda_train = 1.0;
  int max_bad_steps = 3;  // consecutive non-finite steps before reloading the last checkpoint

  void validate() const;
  nlohmann::json to_json() const;
  // Missing keys keep their defaults.
  static TrainConfig from_json(const nlohmann::json& j, TrainConfig base);
  static TrainConfig from_json(const nlohmann::json& j) { return from_json(j, TrainConfig()); }
};

struct TrainStepRecord {
  int step = 0;
  double loss = 0.0;
  std::vector<std::string> ref_crop_ids;
  std::vector<bool> null_text;
  double grad_norm = 0.0;
  double wall_time = 0.0;

  nlohmann::json to_json() const;
  static TrainStepRecord from_json(const nlohmann::json& j);
  // Equal in everything except wall_time.
  bool same_result(const TrainStepRecord& o) const;
};

// Everything make_batch needs, decoded once: clip latents, caption
// embeddings, and per-crop image features.
struct TrainingData {
  std::vector<std::string> video_ids;
  std::vector<LatentVideo> latents;
  std::vector<Matrix> text;
  std::vector<std::vector<ImageFeatures>> references;
};

// Loads a manifest under `root`. Records with an empty pool are skipped with
// a warning; a record without a unified caption is an error.
TrainingData load_training_data(const std::filesystem::path& manifest, const std::filesystem::path& root,
                                const Backbone& backbone, const FeatureExtractor& extractor);

// Randomness is derived from (seed, purpose, step, slot) so any step can be
// rebuilt without replaying the ones before it.
std::vector<TrainingExample> make_batch(const TrainingData& data, const Backbone& backbone, int step,
                                        const TrainConfig& config);

struct AdamState {
  int step = 0;
  NamedTensors m;
  NamedTensors v;

  static AdamState zeros_like(const AdapterWeights& w);
  void save(const std::filesystem::path& path) const;
  static AdamState load(const std::filesystem::path& path);
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

// One optimizer update on the adapter only. Raises NumericError (weights
// untouched) when the loss or gradient is not finite.
TrainStepRecord train_step(const std::vector<TrainingExample>& batch, AdapterWeights& weights, AdamState& opt,
                           const TrainConfig& config, const Backbone& backbone);

struct TrainResult {
  AdapterWeights weights;
  std::filesystem::path final_checkpoint;
  std::vector<TrainStepRecord> records;
  int bad_steps = 0;
};

struct TrainLoopOptions {
  std::filesystem::path out_dir;
  // Stop after this many completed steps (for interruption tests); -1 runs to config.steps.
  int stop_after = -1;
  // Resume from out_dir/checkpoints/step_N when set; "latest" picks the highest N.
  std::optional<std::string> resume;
};

// Writes checkpoints/step_N.ckpt (+ .opt sidecar) every checkpoint_every steps
// and at the end, and appends one metrics.jsonl line per step.
TrainResult train_loop(const TrainingData& data, const Backbone& backbone, const AdapterConfig& adapter_config,
                       const TrainConfig& config, const TrainLoopOptions& options);

std::filesystem::path checkpoint_path(const std::filesystem::path& out_dir, int step);
std::optional<int> latest_checkpoint_step(const std::filesystem::path& out_dir);

}  // namespace idkit
