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

#include "idkit/net/remote_extractor.hpp"

#include "idkit/core/error.hpp"
#include "idkit/core/fileio.hpp"
#include "idkit/io/image_io.hpp"
#include "idkit/net/http_client.hpp"

namespace idkit {

RemoteExtractor::RemoteExtractor(Endpoint endpoint, int tokens, int dim)
    : endpoint_(std::move(endpoint)), tokens_(tokens), dim_(dim) {
  if (tokens_ < 1 || dim_ < 1) throw ConfigError("remote extractor: tokens and dim must be positive");
  endpoint_.validate();
}

Matrix RemoteExtractor::compute(const Image& image) const {
  const json res = post_json(endpoint_, {{"image", base64_encode(encode_png(image))}}, json::object());
  const json& rows = res.at("features");
  if (!rows.is_array() || static_cast<int>(rows.size()) != tokens_)
    throw ContentError("remote extractor returned wrong token count");
  Matrix out(tokens_, dim_);
  for (int i = 0; i < tokens_; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != dim_)
      throw ContentError("remote extractor returned wrong feature width");
    for (int j = 0; j < dim_; ++j) out(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return out;
}

std::unique_ptr<FeatureExtractor> make_remote_extractor(const ExtractorConfig& config) {
  if (config.endpoint_file.empty()) throw ConfigError("remote extractor needs endpoint_file");
  const json j = read_json(config.endpoint_file);
  return std::make_unique<RemoteExtractor>(Endpoint::from_json(j), j.value("tokens", config.grid * config.grid),
                                           j.value("dim", config.d_img));
}

}  // namespace idkit
