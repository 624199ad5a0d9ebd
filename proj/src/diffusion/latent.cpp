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

#include "idkit/diffusion/latent.hpp"

#include <cmath>
#include <cstring>

#include "idkit/core/error.hpp"

namespace idkit {

bool LatentVideo::all_finite() const {
  for (double v : z)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix LatentVideo::to_tokens() const {
  Matrix m(frames * height * width, channels);
  for (int t = 0; t < frames; ++t)
    for (int c = 0; c < channels; ++c)
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) m((t * height + y) * width + x, c) = at(t, c, y, x);
  return m;
}

LatentVideo LatentVideo::from_tokens(const Matrix& tokens, int frames, int channels, int height, int width) {
  if (tokens.rows != frames * height * width || tokens.cols != channels)
    throw ShapeError("from_tokens: " + tokens.shape_str() + " does not match latent shape");
  LatentVideo v(frames, channels, height, width);
  for (int t = 0; t < frames; ++t)
    for (int c = 0; c < channels; ++c)
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) v.at(t, c, y, x) = tokens((t * height + y) * width + x, c);
  return v;
}

LatentVideo LatentVideo::randn(int t, int c, int h, int w, Rng& rng) {
  LatentVideo v(t, c, h, w);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (double& x : v.z) x = dist(rng);
  return v;
}

bool bitwise_equal(const LatentVideo& a, const LatentVideo& b) {
  return a.same_shape(b) && std::memcmp(a.z.data(), b.z.data(), a.z.size() * sizeof(double)) == 0;
}

double max_abs_diff(const LatentVideo& a, const LatentVideo& b) {
  if (!a.same_shape(b)) throw ShapeError("max_abs_diff: latent shapes differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.z.size(); ++i) m = std::max(m, std::abs(a.z[i] - b.z[i]));
  return m;
}

}  // namespace idkit
