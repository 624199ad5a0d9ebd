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

#include <filesystem>

#include <json.hpp>

#include "idkit/adapter/weights.hpp"
#include "idkit/diffusion/backbone_spec.hpp"

namespace idkit {

// Adapter checkpoint layout:
//   8 bytes   magic "IDKCKPT\0"
//   8 bytes   header length N, little-endian u64
//   N bytes   JSON header {format_version, backbone_spec_hash, n_queries,
//             d_ctx, lambda_default, seed, adapter_config, backbone_spec,
//             tensors: [{name, shape, offset, nbytes}], data_bytes,
//             data_fnv1a, extra}
//   payload   float32 little-endian tensors, back to back
inline constexpr int kCheckpointFormatVersion = 1;

struct CheckpointInfo {
  nlohmann::json header;
  BackboneSpec backbone_spec;
  AdapterConfig adapter_config;
};

void save_adapter(const AdapterWeights& weights, const BackboneSpec& spec, const std::filesystem::path& path,
                  const nlohmann::json& extra = nlohmann::json::object());

// Reads and validates the header only.
CheckpointInfo read_checkpoint_info(const std::filesystem::path& path);

// Loads and checks the checkpoint against `spec`. Throws VersionMismatchError,
// HashMismatchError, or TruncatedCheckpointError; never returns partial weights.
AdapterWeights load_adapter(const std::filesystem::path& path, const BackboneSpec& spec);

// Loads against the backbone spec recorded in the checkpoint itself.
AdapterWeights load_adapter(const std::filesystem::path& path, BackboneSpec* spec_out = nullptr);

}  // namespace idkit
