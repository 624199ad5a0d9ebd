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

#include "idkit/core/video.hpp"

#include <algorithm>

#include "idkit/core/error.hpp"

namespace idkit {

Image Video::frame(int i) const {
  if (i < 0 || i >= frames) throw ArgumentError("frame index " + std::to_string(i) + " out of range");
  Image img(height, width);
  auto src = frame_span(i);
  std::copy(src.begin(), src.end(), img.rgb.begin());
  return img;
}

void Video::set_frame(int i, const Image& img) {
  if (i < 0 || i >= frames) throw ArgumentError("frame index " + std::to_string(i) + " out of range");
  if (img.height != height || img.width != width) throw ShapeError("set_frame: frame size mismatch");
  std::copy(img.rgb.begin(), img.rgb.end(), frame_span(i).begin());
}

}  // namespace idkit
