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
#include <string>
#include <vector>

#include <json.hpp>

#include "idkit/dataset/types.hpp"

namespace idkit {

struct SyntheticVideoSpec {
  std::string id;
  int faces = 1;                     // 0, 1 or 2, used when faces_per_frame is empty
  std::vector<int> faces_per_frame;  // optional per-frame override
};

struct CorpusSpec {
  int frames = 20;
  int height = 96;
  int width = 128;
  int radius = 0;  // 0 picks min(height, width) / 8
  std::vector<SyntheticVideoSpec> videos;

  void validate() const;
  nlohmann::json to_json() const;
  // Accepts either an explicit "videos" list or {"count", "multi_face"}.
  static CorpusSpec from_json(const nlohmann::json& j);
  static CorpusSpec uniform(int count, int multi_face, int frames = 20, int height = 96, int width = 128);
  int face_count(const SyntheticVideoSpec& v, int frame) const;
};

struct SyntheticCorpus {
  std::vector<RawVideo> videos;
  nlohmann::json ground_truth;  // {"seed", "videos": [{id, multi_face, faces_per_frame, faces: [...]}]}
};

SyntheticCorpus generate_synthetic_corpus(const CorpusSpec& spec, std::uint64_t seed);

// <dir>/videos/<id>/frame_XXXX.png and <dir>/ground_truth.json
void write_corpus(const std::filesystem::path& dir, const SyntheticCorpus& corpus);
std::vector<std::string> list_corpus_videos(const std::filesystem::path& dir);
RawVideo load_raw_video(const std::filesystem::path& corpus_dir, const std::string& video_id);

}  // namespace idkit
