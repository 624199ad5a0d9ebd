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

#include "idkit/adapter/extractor.hpp"

#include "idkit/core/error.hpp"
#include "idkit/core/rng.hpp"
#include "idkit/net/remote_extractor.hpp"

namespace idkit {

PatchMeanExtractor::PatchMeanExtractor(int grid_rows, int grid_cols, Matrix projection)
    : grid_rows_(grid_rows), grid_cols_(grid_cols), projection_(std::move(projection)) {
  if (grid_rows_ < 1 || grid_cols_ < 1) throw ConfigError("patch grid must be at least 1x1");
  if (projection_.rows != 3 || projection_.cols < 1)
    throw ShapeError("patch projection must be [3 x d_img], got " + projection_.shape_str());
}

Matrix PatchMeanExtractor::compute(const Image& image) const {
  Matrix means(token_count(), 3);
  for (int gr = 0; gr < grid_rows_; ++gr) {
    const int y0 = gr * image.height / grid_rows_;
    const int y1 = (gr + 1) * image.height / grid_rows_;
    for (int gc = 0; gc < grid_cols_; ++gc) {
      const int x0 = gc * image.width / grid_cols_;
      const int x1 = (gc + 1) * image.width / grid_cols_;
      double acc[3] = {0.0, 0.0, 0.0};
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          for (int c = 0; c < 3; ++c) acc[c] += image.at(y, x, c);
      const double n = static_cast<double>((y1 - y0) * (x1 - x0));
      for (int c = 0; c < 3; ++c) means(gr * grid_cols_ + gc, c) = acc[c] / n;
    }
  }
  return matmul(means, projection_);
}

nlohmann::json ExtractorConfig::to_json() const {
  nlohmann::json j{{"kind", kind}, {"grid", grid}, {"d_img", d_img}, {"seed", seed}};
  if (!endpoint_file.empty()) j["endpoint_file"] = endpoint_file;
  return j;
}

ExtractorConfig ExtractorConfig::from_json(const nlohmann::json& j) {
  ExtractorConfig c;
  c.kind = j.value("kind", c.kind);
  c.grid = j.value("grid", c.grid);
  c.d_img = j.value("d_img", c.d_img);
  c.seed = j.value("seed", c.seed);
  c.endpoint_file = j.value("endpoint_file", std::string());
  return c;
}

std::unique_ptr<FeatureExtractor> make_extractor(const ExtractorConfig& config) {
  if (config.kind == "patch_mean") {
    Rng rng = make_rng(config.seed, {0x65787472});
    Matrix proj = randn(3, config.d_img, 1.0, rng);
    round_to_float(proj);
    return std::make_unique<PatchMeanExtractor>(config.grid, config.grid, std::move(proj));
  }
  if (config.kind == "remote") return make_remote_extractor(config);
  throw ConfigError("unknown feature extractor kind '" + config.kind + "'");
}

ImageFeatures extract_image_features(const Image& image, const FeatureExtractor& extractor,
                                     const std::string& source_id) {
  if (image.height < extractor.min_height() || image.width < extractor.min_width()) {
    throw ArgumentError(source_id + ": image " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                        " is smaller than the " + extractor.name() + " minimum " +
                        std::to_string(extractor.min_height()) + "x" + std::to_string(extractor.min_width()));
  }
  if (!image.in_unit_range()) throw ArgumentError(source_id + ": pixel values outside [0, 1]");
  Matrix tokens;
  try {
    tokens = extractor.compute(image);
  } catch (const std::exception& e) {
    throw BackendError(source_id, std::string(extractor.name()) + " failed: " + e.what());
  }
  if (tokens.rows != extractor.token_count() || tokens.cols != extractor.feature_dim())
    throw BackendError(source_id, extractor.name() + " returned " + tokens.shape_str());
  if (!tokens.all_finite()) throw BackendError(source_id, extractor.name() + " returned non-finite features");
  return {std::move(tokens), source_id};
}

}  // namespace idkit
