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

#include <cstdint>
#include <initializer_list>
#include <random>

#include "idkit/core/matrix.hpp"

namespace idkit {

using Rng = std::mt19937_64;

// Independent stream for (seed, purpose, counter...). Streams are derived, not
// advanced, so any step can be replayed without the history before it.
Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream);

Matrix randn(int rows, int cols, double stddev, Rng& rng);
double uniform01(Rng& rng);
int uniform_index(Rng& rng, int n);

}  // namespace idkit
