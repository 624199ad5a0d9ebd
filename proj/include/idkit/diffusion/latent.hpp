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
#include <vector>

#include "idkit/core/matrix.hpp"
#include "idkit/core/rng.hpp"

namespace idkit {

// Latent video, T x C x H x W, frame-major.
struct LatentVideo {
  int frames = 0;
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> z;
  std::optional<double> frame_rate_hint;

  LatentVideo() = default;
  LatentVideo(int t, int c, int h, int w, double fill = 0.0)
      : frames(t), channels(c), height(h), width(w), z(static_cast<std::size_t>(t) * c * h * w, fill) {}

  std::size_t size() const { return z.size(); }
  bool same_shape(const LatentVideo& o) const {
    return frames == o.frames && channels == o.channels && height == o.height && width == o.width;
  }
  double& at(int t, int c, int y, int x) { return z[((static_cast<std::size_t>(t) * channels + c) * height + y) * width + x]; }
  double at(int t, int c, int y, int x) const {
    return z[((static_cast<std::size_t>(t) * channels + c) * height + y) * width + x];
  }
  bool all_finite() const;

  // Rows are pixels (t, y, x) in that nesting order, columns are channels.
  Matrix to_tokens() const;
  static LatentVideo from_tokens(const Matrix& tokens, int frames, int channels, int height, int width);

  static LatentVideo randn(int t, int c, int h, int w, Rng& rng);
};

bool bitwise_equal(const LatentVideo& a, const LatentVideo& b);
double max_abs_diff(const LatentVideo& a, const LatentVideo& b);

}  // namespace idkit
