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

#include "idkit/io/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <fmt/format.h>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "idkit/core/error.hpp"
#include "idkit/core/fileio.hpp"

namespace idkit {

std::uint8_t to_u8(float v) {
  const float c = std::min(1.0f, std::max(0.0f, v));
  return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

namespace {

cv::Mat to_bgr8(const Image& image) {
  cv::Mat m(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    auto* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width; ++x)
      row[x] = cv::Vec3b(to_u8(image.at(y, x, 2)), to_u8(image.at(y, x, 1)), to_u8(image.at(y, x, 0)));
  }
  return m;
}

Image from_bgr8(const cv::Mat& m) {
  Image img(m.rows, m.cols);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < m.cols; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = row[x][2 - c] / 255.0f;
  }
  return img;
}

const std::vector<int> kPngParams{cv::IMWRITE_PNG_COMPRESSION, 6};

}  // namespace

void write_png(const std::filesystem::path& path, const Image& image) {
  write_atomic(path, encode_png(image));
}

Image read_png(const std::filesystem::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (m.empty()) throw IoError("cannot decode image " + path.string());
  return from_bgr8(m);
}

std::vector<unsigned char> encode_png(const Image& image) {
  std::vector<unsigned char> buf;
  if (!cv::imencode(".png", to_bgr8(image), buf, kPngParams)) throw IoError("PNG encoding failed");
  return buf;
}

Image decode_png(const std::vector<unsigned char>& bytes) {
  cv::Mat m = cv::imdecode(bytes, cv::IMREAD_COLOR);
  if (m.empty()) throw IoError("cannot decode PNG buffer");
  return from_bgr8(m);
}

Image resize(const Image& image, int height, int width) {
  if (height < 1 || width < 1) throw ArgumentError("resize target must be positive");
  if (height == image.height && width == image.width) return image;
  cv::Mat src(image.height, image.width, CV_32FC3, const_cast<float*>(image.rgb.data()));
  cv::Mat dst;
  const bool shrink = height < image.height && width < image.width;
  cv::resize(src, dst, cv::Size(width, height), 0, 0, shrink ? cv::INTER_AREA : cv::INTER_LINEAR);
  Image out(height, width);
  std::memcpy(out.rgb.data(), dst.ptr<float>(0), out.rgb.size() * sizeof(float));
  for (float& v : out.rgb) v = std::min(1.0f, std::max(0.0f, v));
  return out;
}

Image crop(const Image& image, int y0, int x0, int height, int width) {
  if (y0 < 0 || x0 < 0 || height < 1 || width < 1 || y0 + height > image.height || x0 + width > image.width)
    throw ArgumentError(fmt::format("crop [{},{} {}x{}] outside {}x{} image", y0, x0, height, width, image.height,
                                    image.width));
  Image out(height, width);
  for (int y = 0; y < height; ++y)
    std::copy_n(image.rgb.begin() + (static_cast<std::size_t>(y0 + y) * image.width + x0) * 3, width * 3,
                out.rgb.begin() + static_cast<std::size_t>(y) * width * 3);
  return out;
}

std::vector<std::filesystem::path> write_frames(const std::filesystem::path& dir, const Video& video) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (int i = 0; i < video.frames; ++i) {
    auto p = dir / fmt::format("frame_{:04d}.png", i);
    write_png(p, video.frame(i));
    paths.push_back(std::move(p));
  }
  return paths;
}

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

constexpr char kClipMagic[8] = {'I', 'D', 'K', 'C', 'L', 'I', 'P', '1'};

}  // namespace

void write_clip(const std::filesystem::path& path, const Video& clip) {
  std::vector<unsigned char> out(kClipMagic, kClipMagic + 8);
  put_u32(out, clip.frames);
  put_u32(out, clip.height);
  put_u32(out, clip.width);
  put_u32(out, 3);
  out.reserve(out.size() + clip.data.size());
  for (float v : clip.data) out.push_back(to_u8(v));
  write_atomic(path, out);
}

std::array<int, 4> read_clip_shape(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char head[24];
  if (!in.read(reinterpret_cast<char*>(head), sizeof head)) throw IoError(path.string() + ": truncated clip header");
  if (std::memcmp(head, kClipMagic, 8) != 0) throw IoError(path.string() + ": not a clip file");
  return {static_cast<int>(get_u32(head + 8)), static_cast<int>(get_u32(head + 12)),
          static_cast<int>(get_u32(head + 16)), static_cast<int>(get_u32(head + 20))};
}

Video read_clip(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kClipMagic, 8) != 0)
    throw IoError(path.string() + ": not a clip file");
  const int n = static_cast<int>(get_u32(bytes.data() + 8));
  const int h = static_cast<int>(get_u32(bytes.data() + 12));
  const int w = static_cast<int>(get_u32(bytes.data() + 16));
  const int c = static_cast<int>(get_u32(bytes.data() + 20));
  if (c != 3) throw IoError(path.string() + ": expected 3 channels");
  Video v(n, h, w);
  if (bytes.size() != 24 + v.data.size()) throw IoError(path.string() + ": clip payload size mismatch");
  for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] = bytes[24 + i] / 255.0f;
  return v;
}

}  // namespace idkit
