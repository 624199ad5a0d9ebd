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

#include "idkit/core/matrix.hpp"
#include "idkit/core/video.hpp"
#include "idkit/diffusion/latent.hpp"

namespace idkit {

// Stand-in for a latent autoencoder. Each latent cell expands to a
// factor x factor RGB block through a fixed orthonormal (DCT-II) basis, so
// encode(decode(z)) == z whenever decoding does not clamp.
class ToyVae {
 public:
  ToyVae(int channels, int factor);

  int channels() const { return channels_; }
  int factor() const { return factor_; }

  Video decode(const LatentVideo& z) const;
  LatentVideo encode(const Video& frames) const;

 private:
  int channels_;
  int factor_;
  double scale_;
  Matrix basis_;  // [3 * factor^2 x channels]
};

}  // namespace idkit
