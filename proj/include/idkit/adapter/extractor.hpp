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
#include <memory>
#include <string>

#include <json.hpp>

#include "idkit/adapter/types.hpp"
#include "idkit/core/image.hpp"

namespace idkit {

// Pluggable image feature backend.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::string name() const = 0;
  virtual int token_count() const = 0;
  virtual int feature_dim() const = 0;
  virtual int min_height() const { return 1; }
  virtual int min_width() const { return 1; }
  // [token_count x feature_dim]
  virtual Matrix compute(const Image& image) const = 0;
};

// Deterministic stand-in for a pretrained image encoder: mean RGB over a
// grid of patches, then a fixed 3 -> d_img linear map.
class PatchMeanExtractor : public FeatureExtractor {
 public:
  PatchMeanExtractor(int grid_rows, int grid_cols, Matrix projection);

  std::string name() const override { return "patch_mean"; }
  int token_count() const override { return grid_rows_ * grid_cols_; }
  int feature_dim() const override { return projection_.cols; }
  int min_height() const override { return grid_rows_; }
  int min_width() const override { return grid_cols_; }
  Matrix compute(const Image& image) const override;

  const Matrix& projection() const { return projection_; }

 private:
  int grid_rows_;
  int grid_cols_;
  Matrix projection_;  // [3 x d_img]
};

struct ExtractorConfig {
  std::string kind = "patch_mean";  // or "remote"
  int grid = 4;
  int d_img = 16;
  std::uint64_t seed = 7;
  std::string endpoint_file;  // remote only: Endpoint JSON

  nlohmann::json to_json() const;
  static ExtractorConfig from_json(const nlohmann::json& j);
};

std::unique_ptr<FeatureExtractor> make_extractor(const ExtractorConfig& config);

// Validates the input, runs the backend, and tags the result. Backend failures
// come back as BackendError carrying `source_id`.
ImageFeatures extract_image_features(const Image& image, const FeatureExtractor& extractor,
                                     const std::string& source_id);

}  // namespace idkit
