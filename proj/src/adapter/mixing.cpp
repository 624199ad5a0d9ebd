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

#include "idkit/adapter/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "idkit/core/error.hpp"

namespace idkit {

FaceTokens mix_identities(std::span<const FaceTokens> tokens, std::span<const double> weights) {
  if (tokens.empty()) throw ArgumentError("mix_identities: no identities given");
  if (tokens.size() != weights.size())
    throw ArgumentError("mix_identities: " + std::to_string(tokens.size()) + " identities but " +
                        std::to_string(weights.size()) + " weights");
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ArgumentError("mix_identities: weights must be finite and nonnegative");
    total += w;
  }
  if (total == 0.0) throw ArgumentError("mix_identities: all weights are zero");
  for (const auto& t : tokens) {
    if (!t.tokens.same_shape(tokens[0].tokens))
      throw ShapeError("mix_identities: " + t.tokens.shape_str() + " vs " + tokens[0].tokens.shape_str());
  }

  FaceTokens out;
  std::map<std::string, double> sources;
  bool first = true;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double w = weights[i] / total;
    if (w == 0.0) continue;
    if (first) {
      out.tokens = w * tokens[i].tokens;
      first = false;
    } else {
      for (std::size_t k = 0; k < out.tokens.data.size(); ++k) out.tokens.data[k] += w * tokens[i].tokens.data[k];
    }
    if (tokens[i].provenance.empty()) {
      sources["#" + std::to_string(i)] += w;
    } else {
      for (const auto& [src, pw] : tokens[i].provenance) sources[src] += w * pw;
    }
  }
  // Rounding can push a blended entry an ulp outside its inputs' range.
  for (std::size_t k = 0; k < out.tokens.data.size(); ++k) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (weights[i] == 0.0) continue;
      lo = std::min(lo, tokens[i].tokens.data[k]);
      hi = std::max(hi, tokens[i].tokens.data[k]);
    }
    out.tokens.data[k] = std::clamp(out.tokens.data[k], lo, hi);
  }
  out.provenance.assign(sources.begin(), sources.end());
  return out;
}

}  // namespace idkit
