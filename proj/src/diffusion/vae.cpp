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

#include "idkit/diffusion/vae.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "idkit/core/error.hpp"

namespace idkit {

ToyVae::ToyVae(int channels, int factor) : channels_(channels), factor_(factor) {
  const int n = 3 * factor * factor;
  if (channels < 1 || factor < 1 || channels > n) throw ConfigError("ToyVae: need 1 <= channels <= 3 * factor^2");
  basis_ = Matrix(n, channels);
  for (int k = 0; k < channels; ++k) {
    const double norm = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) basis_(i, k) = norm * std::cos(std::numbers::pi * (i + 0.5) * k / n);
  }
  // A unit latent offset on channel 0 moves every pixel by 1/4.
  scale_ = std::sqrt(static_cast<double>(n)) / 4.0;
}

Video ToyVae::decode(const LatentVideo& z) const {
  if (z.channels != channels_) throw ShapeError("ToyVae::decode: latent has " + std::to_string(z.channels) + " channels");
  const int f = factor_;
  Video out(z.frames, z.height * f, z.width * f);
  for (int t = 0; t < z.frames; ++t) {
    for (int y = 0; y < z.height; ++y) {
      for (int x = 0; x < z.width; ++x) {
        for (int dy = 0; dy < f; ++dy) {
          for (int dx = 0; dx < f; ++dx) {
            for (int c = 0; c < 3; ++c) {
              const int i = (dy * f + dx) * 3 + c;
              double acc = 0.0;
              for (int k = 0; k < channels_; ++k) acc += basis_(i, k) * z.at(t, k, y, x);
              out.at(t, y * f + dy, x * f + dx, c) = static_cast<float>(std::clamp(0.5 + scale_ * acc, 0.0, 1.0));
            }
          }
        }
      }
    }
  }
  return out;
}

LatentVideo ToyVae::encode(const Video& frames) const {
  const int f = factor_;
  if (frames.height % f || frames.width % f)
    throw ShapeError("ToyVae::encode: frame size " + std::to_string(frames.height) + "x" +
                     std::to_string(frames.width) + " not divisible by " + std::to_string(f));
  LatentVideo z(frames.frames, channels_, frames.height / f, frames.width / f);
  for (int t = 0; t < z.frames; ++t) {
    for (int y = 0; y < z.height; ++y) {
      for (int x = 0; x < z.width; ++x) {
        for (int k = 0; k < channels_; ++k) {
          double acc = 0.0;
          for (int dy = 0; dy < f; ++dy)
            for (int dx = 0; dx < f; ++dx)
              for (int c = 0; c < 3; ++c)
                acc += basis_((dy * f + dx) * 3 + c, k) * (frames.at(t, y * f + dy, x * f + dx, c) - 0.5);
          z.at(t, k, y, x) = acc / scale_;
        }
      }
    }
  }
  return z;
}

}  // namespace idkit
