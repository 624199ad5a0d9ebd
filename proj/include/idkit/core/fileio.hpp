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
#include <string>
#include <vector>

#include <json.hpp>

namespace idkit {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string read_text(const fs::path& path);
std::vector<unsigned char> read_bytes(const fs::path& path);

// Writes to a sibling temp file and renames it into place.
void write_atomic(const fs::path& path, const std::string& contents);
void write_atomic(const fs::path& path, const std::vector<unsigned char>& contents);

json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& j, int indent = 2);

// Resolves `p` against `root` when relative.
fs::path resolve_under(const fs::path& root, const fs::path& p);

}  // namespace idkit
