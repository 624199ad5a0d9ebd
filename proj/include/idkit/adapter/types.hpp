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

#include <string>
#include <utility>
#include <vector>

#include "idkit/core/matrix.hpp"

namespace idkit {

// Raw image-encoder output for one reference image.
struct ImageFeatures {
  Matrix tokens;  // [n_tokens x d_img]
  std::string source_id;
};

// Identity tokens produced by the face encoder, optionally blended from
// several references.
struct FaceTokens {
  Matrix tokens;  // [n_queries x d_ctx]
  std::vector<std::pair<std::string, double>> provenance;
};

}  // namespace idkit
