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

#include <span>

#include "idkit/adapter/types.hpp"

namespace idkit {

// Convex blend of several identities' face tokens. Weights are normalized to
// sum to one; entries with zero weight do not participate at all, so a
// one-hot weight vector reproduces that input bit for bit.
FaceTokens mix_identities(std::span<const FaceTokens> tokens, std::span<const double> weights);

}  // namespace idkit
