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

#include <fmt/format.h>

#include "idkit/core/error.hpp"
#include "idkit/dataset/pipeline.hpp"
#include "idkit/io/image_io.hpp"

namespace idkit {

Video clip_and_resize(const RawVideo& video, int clip_length, int size, Rng& rng) {
  if (clip_length < 1 || size < 1) throw ArgumentError("clip_length and size must be positive");
  const Video& v = video.frames;
  if (v.frames < clip_length)
    throw SkipRecordError(fmt::format("{}: {} frames, need {}", video.video_id, v.frames, clip_length));
  const int start = uniform_index(rng, v.frames - clip_length + 1);
  const int side = std::min(v.height, v.width);
  const int y0 = (v.height - side) / 2;
  const int x0 = (v.width - side) / 2;
  Video out(clip_length, size, size);
  for (int i = 0; i < clip_length; ++i) {
    Image f = v.frame(start + i);
    if (side != v.height || side != v.width) f = crop(f, y0, x0, side, side);
    out.set_frame(i, resize(f, size, size));
  }
  return out;
}

}  // namespace idkit
