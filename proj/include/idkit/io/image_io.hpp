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

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "idkit/core/image.hpp"
#include "idkit/core/video.hpp"

namespace idkit {

// 8-bit RGB PNG. Values are quantized with round(v * 255).
void write_png(const std::filesystem::path& path, const Image& image);
Image read_png(const std::filesystem::path& path);
std::vector<unsigned char> encode_png(const Image& image);
Image decode_png(const std::vector<unsigned char>& bytes);

// Bilinear resize (area averaging when shrinking).
Image resize(const Image& image, int height, int width);
Image crop(const Image& image, int y0, int x0, int height, int width);

// Writes frame_0000.png ... into `dir`; returns the written paths.
std::vector<std::filesystem::path> write_frames(const std::filesystem::path& dir, const Video& video);

// Animated GIF on a fixed 6x6x6 color cube.
void write_gif(const std::filesystem::path& path, const Video& video, int delay_cs = 12);

// Clip container: magic "IDKCLIP1", then u32 frames, height, width, channels
// (little-endian), then frames*height*width*3 bytes of 8-bit RGB.
void write_clip(const std::filesystem::path& path, const Video& clip);
Video read_clip(const std::filesystem::path& path);
// Shape [frames, height, width, channels] from the header alone.
std::array<int, 4> read_clip_shape(const std::filesystem::path& path);

std::uint8_t to_u8(float v);

}  // namespace idkit
