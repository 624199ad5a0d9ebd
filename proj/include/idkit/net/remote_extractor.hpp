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

#include <memory>

#include "idkit/adapter/extractor.hpp"
#include "idkit/net/endpoint.hpp"

namespace idkit {

// Feature extractor served over HTTP. Sends {"image": <base64 PNG>} and
// expects {"features": [[...], ...]} of shape [token_count x feature_dim].
class RemoteExtractor : public FeatureExtractor {
 public:
  RemoteExtractor(Endpoint endpoint, int tokens, int dim);
  std::string name() const override { return "remote:" + endpoint_.model_name; }
  int token_count() const override { return tokens_; }
  int feature_dim() const override { return dim_; }
  Matrix compute(const Image& image) const override;

 private:
  Endpoint endpoint_;
  int tokens_;
  int dim_;
};

std::unique_ptr<FeatureExtractor> make_remote_extractor(const ExtractorConfig& config);

}  // namespace idkit
