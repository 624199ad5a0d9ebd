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

#include <algorithm>
#include <cmath>

#include "idkit/core/error.hpp"
#include "idkit/core/fileio.hpp"
#include "idkit/io/image_io.hpp"

namespace idkit {

namespace {

// Every pixel is a literal 9-bit code; a clear code is sent before the
// decoder's table would widen to 10 bits.
class BitWriter {
 public:
  void put(unsigned code, int width) {
    acc_ |= static_cast<std::uint64_t>(code) << nbits_;
    nbits_ += width;
    while (nbits_ >= 8) {
      bytes.push_back(static_cast<unsigned char>(acc_ & 0xff));
      acc_ >>= 8;
      nbits_ -= 8;
    }
  }
  void flush() {
    if (nbits_ > 0) bytes.push_back(static_cast<unsigned char>(acc_ & 0xff));
    acc_ = 0;
    nbits_ = 0;
  }
  std::vector<unsigned char> bytes;

 private:
  std::uint64_t acc_ = 0;
  int nbits_ = 0;
};

std::uint8_t palette_index(float r, float g, float b) {
  auto q = [](float v) { return static_cast<int>(std::lround(std::min(1.0f, std::max(0.0f, v)) * 5.0f)); };
  return static_cast<std::uint8_t>(q(r) * 36 + q(g) * 6 + q(b));
}

void put16(std::vector<unsigned char>& out, int v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

}  // namespace

void write_gif(const std::filesystem::path& path, const Video& video, int delay_cs) {
  if (video.frames < 1) throw ArgumentError("write_gif: empty video");
  std::vector<unsigned char> out{'G', 'I', 'F', '8', '9', 'a'};
  put16(out, video.width);
  put16(out, video.height);
  out.push_back(0xF7);  // global color table, 256 entries
  out.push_back(0);
  out.push_back(0);
  for (int i = 0; i < 256; ++i) {
    const int r = i / 36, g = (i / 6) % 6, b = i % 6;
    const bool used = i < 216;
    out.push_back(static_cast<unsigned char>(used ? r * 51 : 0));
    out.push_back(static_cast<unsigned char>(used ? g * 51 : 0));
    out.push_back(static_cast<unsigned char>(used ? b * 51 : 0));
  }
  // Loop forever.
  const unsigned char netscape[] = {0x21, 0xFF, 0x0B, 'N', 'E', 'T', 'S', 'C', 'A', 'P', 'E', '2', '.', '0',
                                    0x03, 0x01, 0x00, 0x00, 0x00};
  out.insert(out.end(), std::begin(netscape), std::end(netscape));

  constexpr unsigned kClear = 256, kEnd = 257;
  constexpr int kWidth = 9;
  for (int f = 0; f < video.frames; ++f) {
    out.insert(out.end(), {0x21, 0xF9, 0x04, 0x04});
    put16(out, delay_cs);
    out.insert(out.end(), {0x00, 0x00});
    out.push_back(0x2C);
    put16(out, 0);
    put16(out, 0);
    put16(out, video.width);
    put16(out, video.height);
    out.push_back(0x00);
    out.push_back(8);  // minimum code size

    BitWriter bw;
    bw.put(kClear, kWidth);
    int since_clear = 0;
    for (int y = 0; y < video.height; ++y) {
      for (int x = 0; x < video.width; ++x) {
        if (since_clear == 250) {
          bw.put(kClear, kWidth);
          since_clear = 0;
        }
        bw.put(palette_index(video.at(f, y, x, 0), video.at(f, y, x, 1), video.at(f, y, x, 2)), kWidth);
        ++since_clear;
      }
    }
    bw.put(kEnd, kWidth);
    bw.flush();
    for (std::size_t i = 0; i < bw.bytes.size(); i += 255) {
      const std::size_t n = std::min<std::size_t>(255, bw.bytes.size() - i);
      out.push_back(static_cast<unsigned char>(n));
      out.insert(out.end(), bw.bytes.begin() + static_cast<std::ptrdiff_t>(i),
                 bw.bytes.begin() + static_cast<std::ptrdiff_t>(i + n));
    }
    out.push_back(0x00);
  }
  out.push_back(0x3B);
  write_atomic(path, out);
}

}  // namespace idkit
