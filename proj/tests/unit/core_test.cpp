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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "idkit/core/error.hpp"
#include "idkit/core/fileio.hpp"
#include "idkit/core/hash.hpp"
#include "idkit/core/matrix.hpp"
#include "idkit/core/rng.hpp"
#include "idkit/core/video.hpp"
#include "idkit/io/image_io.hpp"
#include "test_util.hpp"

namespace idkit {
namespace {

TEST(Matrix, MatmulMatchesHandComputed) {
  Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  Matrix b(3, 2, {7, 8, 9, 10, 11, 12});
  Matrix c = matmul(a, b);
  EXPECT_EQ(c.rows, 2);
  EXPECT_EQ(c.cols, 2);
  EXPECT_DOUBLE_EQ(c(0, 0), 58);
  EXPECT_DOUBLE_EQ(c(0, 1), 64);
  EXPECT_DOUBLE_EQ(c(1, 0), 139);
  EXPECT_DOUBLE_EQ(c(1, 1), 154);
}

TEST(Matrix, MatmulShapeMismatchThrows) {
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
  EXPECT_THROW(Matrix(2, 2) + Matrix(2, 3), ShapeError);
}

TEST(Matrix, TransposeAndIdentity) {
  Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  Matrix t = a.transposed();
  EXPECT_EQ(t.rows, 3);
  EXPECT_DOUBLE_EQ(t(2, 1), 6);
  EXPECT_TRUE(bitwise_equal(matmul(Matrix::identity(2), a), a));
}

TEST(Matrix, RoundToFloat) {
  Matrix m(1, 2, {0.1, 1.0 / 3.0});
  EXPECT_FALSE(float_representable(m));
  round_to_float(m);
  EXPECT_TRUE(float_representable(m));
  EXPECT_EQ(m(0, 0), static_cast<double>(0.1f));
}

TEST(Matrix, FiniteCheck) {
  Matrix m(1, 2, {1.0, 2.0});
  EXPECT_TRUE(m.all_finite());
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(m.all_finite());
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a = make_rng(5, {1, 2});
  Rng b = make_rng(5, {1, 2});
  Rng c = make_rng(5, {1, 3});
  Rng d = make_rng(6, {1, 2});
  const auto va = a(), vb = b(), vc = c(), vd = d();
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
  EXPECT_NE(va, vd);
}

TEST(Rng, UniformIndexInRange) {
  Rng r = make_rng(1, {});
  for (int i = 0; i < 1000; ++i) {
    int k = uniform_index(r, 7);
    ASSERT_GE(k, 0);
    ASSERT_LT(k, 7);
  }
}

TEST(Hash, Fnv1aKnownVectors) {
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ull);
  EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
}

TEST(FileIo, AtomicWriteAndJson) {
  testing::TempDir dir;
  write_atomic(dir / "a.txt", std::string("hello"));
  EXPECT_EQ(read_text(dir / "a.txt"), "hello");
  write_json(dir / "b.json", {{"k", 3}});
  EXPECT_EQ(read_json(dir / "b.json")["k"], 3);
  EXPECT_THROW(read_text(dir / "missing"), IoError);
  EXPECT_EQ(resolve_under("/r", "x/y"), fs::path("/r/x/y"));
  EXPECT_EQ(resolve_under("/r", "/abs"), fs::path("/abs"));
}

TEST(ImageIo, PngRoundTripIsExactOnByteGrid) {
  testing::TempDir dir;
  Image img(5, 7);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(((y * 7 + x) * 3 + c) % 256) / 255.0f;
  write_png(dir / "i.png", img);
  Image back = read_png(dir / "i.png");
  ASSERT_EQ(back.height, 5);
  ASSERT_EQ(back.width, 7);
  for (std::size_t i = 0; i < img.rgb.size(); ++i) EXPECT_FLOAT_EQ(back.rgb[i], img.rgb[i]);
}

TEST(ImageIo, ClipRoundTrip) {
  testing::TempDir dir;
  Video v(3, 4, 5);
  for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] = static_cast<float>(i % 256) / 255.0f;
  write_clip(dir / "c.clip", v);
  auto shape = read_clip_shape(dir / "c.clip");
  EXPECT_EQ(shape[0], 3);
  EXPECT_EQ(shape[1], 4);
  EXPECT_EQ(shape[2], 5);
  EXPECT_EQ(shape[3], 3);
  Video back = read_clip(dir / "c.clip");
  for (std::size_t i = 0; i < v.data.size(); ++i) EXPECT_FLOAT_EQ(back.data[i], v.data[i]);
}

TEST(ImageIo, GifHasHeaderAndTrailer) {
  testing::TempDir dir;
  Video v(2, 8, 8, 0.5f);
  write_gif(dir / "p.gif", v, 10);
  auto bytes = read_bytes(dir / "p.gif");
  ASSERT_GT(bytes.size(), 20u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 6), "GIF89a");
  EXPECT_EQ(bytes.back(), 0x3b);
}

TEST(ImageIo, ResizeIdentityAndShape) {
  Image img(4, 6, 0.25f);
  Image same = resize(img, 4, 6);
  EXPECT_EQ(same.rgb, img.rgb);
  Image small = resize(img, 2, 3);
  EXPECT_EQ(small.height, 2);
  EXPECT_EQ(small.width, 3);
  for (float v : small.rgb) EXPECT_NEAR(v, 0.25f, 1e-6);
}

}  // namespace
}  // namespace idkit
