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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "idkit/core/rng.hpp"
#include "idkit/dataset/detector.hpp"
#include "idkit/dataset/types.hpp"

namespace idkit {

// Contiguous window of `clip_length` frames at a random offset, center-cropped
// to a square along the longer side and resized to size x size.
Video clip_and_resize(const RawVideo& video, int clip_length, int size, Rng& rng);

struct PoolConfig {
  int pool_target = 5;
  int max_attempts = 0;  // 0 means 3 * pool_target
  int ref_size = 224;
  double margin = 0.2;   // per side, relative to the box's longer edge

  int attempts_budget() const { return max_attempts > 0 ? max_attempts : 3 * pool_target; }
  void validate() const;
};

// Square crop around `box` with `margin` padding, clamped to the frame.
Image face_crop(const Image& frame, const FaceBox& box, double margin, int ref_size);

// Walks a shuffled frame order and keeps crops from frames with exactly one
// detection. The result may be empty; every attempt is logged.
FacePool collect_face_pool(const RawVideo& video, const FaceDetector& detector, Rng& rng, const PoolConfig& config);
// As above, but an empty pool raises EmptyPoolError.
FacePool build_face_pool(const RawVideo& video, const FaceDetector& detector, Rng& rng, const PoolConfig& config);

int sample_random_reference(const FacePool& pool, Rng& rng);
int sample_random_reference(std::size_t pool_size, Rng& rng);

// <dir>/crop_K.png plus pool.json {video_id, source_frames, boxes, attempts}
void save_pool(const std::filesystem::path& dir, const FacePool& pool);
FacePool load_pool(const std::filesystem::path& dir, bool load_crops = true);

struct FilterReport {
  std::vector<std::string> kept;
  std::vector<std::string> dropped;
  std::map<std::string, std::string> reasons;

  nlohmann::json to_json() const;
};

// Drops videos where a majority of the attempted frames showed two or more
// faces. Uses the detections recorded during pool construction.
FilterReport filter_multi_face_videos(const std::vector<FacePool>& pools);

void write_manifest(const std::vector<DatasetRecord>& records, const std::filesystem::path& path);
// Validates every line. When `root` is given, referenced files must exist and
// n_pool must match the stored pool.
std::vector<DatasetRecord> read_manifest(const std::filesystem::path& path,
                                         const std::optional<std::filesystem::path>& root = std::nullopt);
nlohmann::json record_to_json(const DatasetRecord& r);
DatasetRecord record_from_json(const nlohmann::json& j);

struct DatasetConfig {
  int clip_length = 16;
  int size = 512;
  PoolConfig pool;
  std::uint64_t seed = 0;

  static DatasetConfig full_scale();
  static DatasetConfig ci();
  void validate() const;
  nlohmann::json to_json() const;
};

struct BuildReport {
  std::vector<DatasetRecord> records;
  FilterReport filter;
  nlohmann::json to_json() const;
};

// Reads <corpus_dir>/videos/*, writes clips/, pools/, manifest.jsonl and
// filter_report.json under `out_root`.
BuildReport build_dataset(const std::filesystem::path& corpus_dir, const std::filesystem::path& out_root,
                          const DatasetConfig& config, const FaceDetector& detector);

// Flag value if given, else $ID_KIT_DATA_ROOT, else the current directory.
std::filesystem::path resolve_data_root(const std::optional<std::string>& flag);

inline constexpr const char* kManifestName = "manifest.jsonl";

}  // namespace idkit
