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

#include <fstream>
#include <set>
#include <sstream>

#include "idkit/core/error.hpp"
#include "idkit/core/fileio.hpp"
#include "idkit/dataset/pipeline.hpp"

namespace idkit {

namespace {

bool plain_relative(const std::string& p) {
  if (p.empty()) return false;
  const fs::path path(p);
  if (path.is_absolute()) return false;
  for (const auto& part : path)
    if (part == "..") return false;
  return true;
}

}  // namespace

json record_to_json(const DatasetRecord& r) {
  json j{{"video_id", r.video_id},
         {"clip_path", r.clip_path},
         {"unified_caption", r.unified_caption},
         {"face_pool_path", r.face_pool_path},
         {"n_pool", r.n_pool}};
  if (r.captions)
    j["captions"] = {{"attribute", r.captions->attribute},
                     {"action", r.captions->action},
                     {"unified", r.captions->unified},
                     {"provenance", r.captions->provenance}};
  return j;
}

DatasetRecord record_from_json(const json& j) {
  if (!j.is_object()) throw ArgumentError("record must be a JSON object");
  auto str = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw ArgumentError(std::string("missing string field '") + key + "'");
    return j[key].get<std::string>();
  };
  DatasetRecord r;
  r.video_id = str("video_id");
  r.clip_path = str("clip_path");
  r.unified_caption = str("unified_caption");
  r.face_pool_path = str("face_pool_path");
  if (!j.contains("n_pool") || !j["n_pool"].is_number_integer())
    throw ArgumentError("missing integer field 'n_pool'");
  r.n_pool = j["n_pool"].get<int>();
  if (r.video_id.empty()) throw ArgumentError("video_id is empty");
  if (r.n_pool < 1) throw ArgumentError("n_pool must be >= 1");
  if (!plain_relative(r.clip_path)) throw ArgumentError("clip_path must be a relative path inside the root");
  if (!plain_relative(r.face_pool_path)) throw ArgumentError("face_pool_path must be a relative path inside the root");
  if (j.contains("captions") && !j["captions"].is_null()) {
    const json& c = j["captions"];
    CaptionTriple t;
    t.attribute = c.value("attribute", std::string());
    t.action = c.value("action", std::string());
    t.unified = c.value("unified", std::string());
    t.provenance = c.value("provenance", json::object());
    r.captions = std::move(t);
  }
  return r;
}

void write_manifest(const std::vector<DatasetRecord>& records, const fs::path& path) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r).dump() + "\n";
  write_atomic(path, out);
}

std::vector<DatasetRecord> read_manifest(const fs::path& path, const std::optional<fs::path>& root) {
  std::istringstream in(read_text(path));
  std::vector<DatasetRecord> records;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    DatasetRecord r;
    try {
      r = record_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw ManifestError(lineno, std::string("malformed JSON: ") + e.what());
    } catch (const ArgumentError& e) {
      throw ManifestError(lineno, e.what());
    }
    if (!seen.insert(r.video_id).second) throw ManifestError(lineno, "duplicate video_id " + r.video_id);
    if (root) {
      if (!fs::exists(*root / r.clip_path)) throw ManifestError(lineno, "missing clip " + r.clip_path);
      const auto pool_dir = *root / r.face_pool_path;
      if (!fs::exists(pool_dir / "pool.json")) throw ManifestError(lineno, "missing pool " + r.face_pool_path);
      try {
        const auto pool = load_pool(pool_dir, false);
        if (static_cast<int>(pool.source_frames.size()) != r.n_pool)
          throw ManifestError(lineno, "n_pool " + std::to_string(r.n_pool) + " does not match pool size " +
                                          std::to_string(pool.source_frames.size()));
      } catch (const IoError& e) {
        throw ManifestError(lineno, e.what());
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace idkit
