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

#include "idkit/dataset/types.hpp"

namespace idkit {

nlohmann::json FaceBox::to_json() const {
  return {{"frame_index", frame_index}, {"x0", x0}, {"y0", y0}, {"x1", x1}, {"y1", y1}, {"confidence", confidence}};
}

FaceBox FaceBox::from_json(const nlohmann::json& j) {
  FaceBox b;
  b.frame_index = j.at("frame_index").get<int>();
  b.x0 = j.at("x0").get<int>();
  b.y0 = j.at("y0").get<int>();
  b.x1 = j.at("x1").get<int>();
  b.y1 = j.at("y1").get<int>();
  b.confidence = j.at("confidence").get<double>();
  return b;
}

bool DatasetRecord::operator==(const DatasetRecord& o) const {
  if (video_id != o.video_id || clip_path != o.clip_path || unified_caption != o.unified_caption ||
      face_pool_path != o.face_pool_path || n_pool != o.n_pool || captions.has_value() != o.captions.has_value())
    return false;
  if (!captions) return true;
  return captions->attribute == o.captions->attribute && captions->action == o.captions->action &&
         captions->unified == o.captions->unified && captions->provenance == o.captions->provenance;
}

}  // namespace idkit
