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
#include <string>
#include <vector>

#include <json.hpp>

#include "idkit/core/image.hpp"
#include "idkit/core/video.hpp"

namespace idkit {

struct RawVideo {
  std::string video_id;
  Video frames;
};

struct FaceBox {
  int frame_index = 0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open pixel box
  double confidence = 0.0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool valid_for(int frame_width, int frame_height) const {
    return 0 <= x0 && x0 < x1 && x1 <= frame_width && 0 <= y0 && y0 < y1 && y1 <= frame_height &&
           confidence >= 0.0 && confidence <= 1.0;
  }
  nlohmann::json to_json() const;
  static FaceBox from_json(const nlohmann::json& j);
};

// One frame examined during pool construction.
struct PoolAttempt {
  int frame = 0;
  int n_faces = 0;
};

struct FacePool {
  std::string video_id;
  std::vector<Image> crops;
  std::vector<int> source_frames;
  std::vector<FaceBox> boxes;
  std::vector<PoolAttempt> attempts;

  std::size_t size() const { return crops.size(); }
  bool empty() const { return crops.empty(); }
};

struct CaptionTriple {
  std::string attribute;
  std::string action;
  std::string unified;
  nlohmann::json provenance = nlohmann::json::object();

  bool complete() const { return !attribute.empty() && !action.empty() && !unified.empty(); }
};

// One manifest line. Paths are relative to the dataset root.
struct DatasetRecord {
  std::string video_id;
  std::string clip_path;
  std::string unified_caption;
  std::string face_pool_path;
  int n_pool = 0;
  std::optional<CaptionTriple> captions;

  bool operator==(const DatasetRecord& o) const;
};

}  // namespace idkit
