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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "idkit/core/image.hpp"

namespace idkit {

// Frame stack, frames x height x width x 3, values in [0, 1].
struct Video {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Video() = default;
  Video(int n, int h, int w, float fill = 0.0f)
      : frames(n), height(h), width(w), data(static_cast<std::size_t>(n) * h * w * 3, fill) {}

  std::size_t frame_size() const { return static_cast<std::size_t>(height) * width * 3; }
  std::span<float> frame_span(int i) { return {data.data() + i * frame_size(), frame_size()}; }
  std::span<const float> frame_span(int i) const { return {data.data() + i * frame_size(), frame_size()}; }

  Image frame(int i) const;
  void set_frame(int i, const Image& img);

  float& at(int f, int y, int x, int c) { return data[((static_cast<std::size_t>(f) * height + y) * width + x) * 3 + c]; }
  float at(int f, int y, int x, int c) const {
    return data[((static_cast<std::size_t>(f) * height + y) * width + x) * 3 + c];
  }
};

}  // namespace idkit
