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

#include <cstdlib>

#include <spdlog/spdlog.h>

#include "idkit/core/error.hpp"
#include "idkit/core/fileio.hpp"
#include "idkit/core/hash.hpp"
#include "idkit/dataset/corpus.hpp"
#include "idkit/dataset/pipeline.hpp"
#include "idkit/io/image_io.hpp"

namespace idkit {

namespace {

constexpr std::uint64_t kClipStream = 1;
constexpr std::uint64_t kPoolStream = 2;

}  // namespace

DatasetConfig DatasetConfig::full_scale() { return {}; }

DatasetConfig DatasetConfig::ci() {
  DatasetConfig c;
  c.clip_length = 8;
  c.size = 64;
  c.pool.pool_target = 3;
  c.pool.ref_size = 32;
  return c;
}

void DatasetConfig::validate() const {
  if (clip_length < 1) throw ConfigError("clip_length must be >= 1");
  if (size < 1) throw ConfigError("size must be >= 1");
  pool.validate();
}

json DatasetConfig::to_json() const {
  return {{"clip_length", clip_length},
          {"size", size},
          {"pool_target", pool.pool_target},
          {"max_attempts", pool.attempts_budget()},
          {"ref_size", pool.ref_size},
          {"margin", pool.margin},
          {"seed", seed}};
}

json BuildReport::to_json() const {
  return {{"kept", filter.kept.size()}, {"dropped", filter.dropped.size()}, {"report", filter.to_json()}};
}

BuildReport build_dataset(const fs::path& corpus_dir, const fs::path& out_root, const DatasetConfig& config,
                          const FaceDetector& detector) {
  config.validate();
  const auto ids = list_corpus_videos(corpus_dir);
  if (ids.empty()) spdlog::warn("no videos found under {}", (corpus_dir / "videos").string());
  fs::create_directories(out_root);

  struct Outcome {
    std::optional<FacePool> pool;
    std::optional<Video> clip;
    std::string skip_reason;
  };
  std::vector<Outcome> outcomes(ids.size());
  std::vector<std::string> errors(ids.size());

#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < ids.size(); ++i) {
    try {
      const RawVideo video = load_raw_video(corpus_dir, ids[i]);
      const std::uint64_t key = fnv1a(ids[i]);
      Rng pool_rng = make_rng(config.seed, {key, kPoolStream});
      outcomes[i].pool = collect_face_pool(video, detector, pool_rng, config.pool);
      Rng clip_rng = make_rng(config.seed, {key, kClipStream});
      outcomes[i].clip = clip_and_resize(video, config.clip_length, config.size, clip_rng);
    } catch (const SkipRecordError& e) {
      outcomes[i].skip_reason = std::string("too_short: ") + e.what();
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (!errors[i].empty()) throw IoError(ids[i] + ": " + errors[i]);

  BuildReport report;
  std::vector<FacePool> evidence;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!outcomes[i].skip_reason.empty()) {
      report.filter.dropped.push_back(ids[i]);
      report.filter.reasons[ids[i]] = outcomes[i].skip_reason;
    } else {
      evidence.push_back(*outcomes[i].pool);
    }
  }
  const FilterReport multi = filter_multi_face_videos(evidence);
  for (const auto& [id, why] : multi.reasons) report.filter.reasons[id] = why;
  report.filter.dropped.insert(report.filter.dropped.end(), multi.dropped.begin(), multi.dropped.end());

  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!outcomes[i].pool || report.filter.reasons.count(ids[i])) continue;
    const FacePool& pool = *outcomes[i].pool;
    if (pool.empty()) {
      report.filter.dropped.push_back(ids[i]);
      report.filter.reasons[ids[i]] = "empty_pool: no single-face frame found";
      continue;
    }
    DatasetRecord r;
    r.video_id = ids[i];
    r.clip_path = "clips/" + ids[i] + ".clip";
    r.face_pool_path = "pools/" + ids[i];
    r.n_pool = static_cast<int>(pool.size());
    write_clip(out_root / r.clip_path, *outcomes[i].clip);
    save_pool(out_root / r.face_pool_path, pool);
    report.filter.kept.push_back(ids[i]);
    report.records.push_back(std::move(r));
  }
  std::sort(report.filter.dropped.begin(), report.filter.dropped.end());
  write_manifest(report.records, out_root / kManifestName);
  json summary = report.filter.to_json();
  summary["config"] = config.to_json();
  write_json(out_root / "filter_report.json", summary);
  return report;
}

fs::path resolve_data_root(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("ID_KIT_DATA_ROOT"); env != nullptr && *env != '\0') return env;
  return fs::current_path();
}

}  // namespace idkit
