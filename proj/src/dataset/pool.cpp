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

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "idkit/core/error.hpp"
#include "idkit/core/fileio.hpp"
#include "idkit/dataset/pipeline.hpp"
#include "idkit/io/image_io.hpp"

namespace idkit {

void PoolConfig::validate() const {
  if (pool_target < 1) throw ConfigError("pool_target must be >= 1");
  if (max_attempts < 0) throw ConfigError("max_attempts must be >= 0");
  if (ref_size < 1) throw ConfigError("ref_size must be >= 1");
  if (!(margin >= 0.0)) throw ConfigError("margin must be >= 0");
}

Image face_crop(const Image& frame, const FaceBox& box, double margin, int ref_size) {
  const double cx = 0.5 * (box.x0 + box.x1);
  const double cy = 0.5 * (box.y0 + box.y1);
  const double side = std::max(box.width(), box.height()) * (1.0 + 2.0 * margin);
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - side / 2)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - side / 2)));
  const int x1 = std::min(frame.width, static_cast<int>(std::ceil(cx + side / 2)));
  const int y1 = std::min(frame.height, static_cast<int>(std::ceil(cy + side / 2)));
  return resize(crop(frame, y0, x0, y1 - y0, x1 - x0), ref_size, ref_size);
}

FacePool collect_face_pool(const RawVideo& video, const FaceDetector& detector, Rng& rng, const PoolConfig& config) {
  config.validate();
  if (video.frames.frames < 1) throw ArgumentError(video.video_id + ": empty video");
  std::vector<int> order(static_cast<std::size_t>(video.frames.frames));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  FacePool pool;
  pool.video_id = video.video_id;
  const int budget = std::min<int>(config.attempts_budget(), static_cast<int>(order.size()));
  for (int a = 0; a < budget && static_cast<int>(pool.size()) < config.pool_target; ++a) {
    const int f = order[static_cast<std::size_t>(a)];
    const Image frame = video.frames.frame(f);
    const auto boxes = detect_faces(frame, f, detector);
    pool.attempts.push_back({f, static_cast<int>(boxes.size())});
    if (boxes.size() != 1) continue;
    pool.crops.push_back(face_crop(frame, boxes[0], config.margin, config.ref_size));
    pool.source_frames.push_back(f);
    pool.boxes.push_back(boxes[0]);
  }
  return pool;
}

FacePool build_face_pool(const RawVideo& video, const FaceDetector& detector, Rng& rng, const PoolConfig& config) {
  FacePool pool = collect_face_pool(video, detector, rng, config);
  if (pool.empty())
    throw EmptyPoolError(fmt::format("{}: no single-face frame in {} attempts", video.video_id, pool.attempts.size()));
  return pool;
}

int sample_random_reference(std::size_t pool_size, Rng& rng) {
  if (pool_size == 0) throw ArgumentError("cannot sample from an empty face pool");
  return uniform_index(rng, static_cast<int>(pool_size));
}

int sample_random_reference(const FacePool& pool, Rng& rng) { return sample_random_reference(pool.size(), rng); }

void save_pool(const std::filesystem::path& dir, const FacePool& pool) {
  std::filesystem::create_directories(dir);
  json boxes = json::array(), attempts = json::array();
  for (const auto& b : pool.boxes) boxes.push_back(b.to_json());
  for (const auto& a : pool.attempts) attempts.push_back({{"frame", a.frame}, {"n_faces", a.n_faces}});
  for (std::size_t k = 0; k < pool.crops.size(); ++k) write_png(dir / fmt::format("crop_{}.png", k), pool.crops[k]);
  write_json(dir / "pool.json", {{"video_id", pool.video_id},
                                 {"source_frames", pool.source_frames},
                                 {"boxes", boxes},
                                 {"attempts", attempts}});
}

FacePool load_pool(const std::filesystem::path& dir, bool load_crops) {
  const json j = read_json(dir / "pool.json");
  FacePool pool;
  try {
    pool.video_id = j.at("video_id").get<std::string>();
    pool.source_frames = j.at("source_frames").get<std::vector<int>>();
    for (const auto& b : j.at("boxes")) pool.boxes.push_back(FaceBox::from_json(b));
    if (j.contains("attempts"))
      for (const auto& a : j["attempts"]) pool.attempts.push_back({a.at("frame").get<int>(), a.at("n_faces").get<int>()});
  } catch (const json::exception& e) {
    throw IoError(dir.string() + "/pool.json: " + e.what());
  }
  if (pool.boxes.size() != pool.source_frames.size())
    throw IoError(dir.string() + "/pool.json: boxes and source_frames differ in length");
  if (load_crops)
    for (std::size_t k = 0; k < pool.source_frames.size(); ++k)
      pool.crops.push_back(read_png(dir / fmt::format("crop_{}.png", k)));
  return pool;
}

FilterReport filter_multi_face_videos(const std::vector<FacePool>& pools) {
  FilterReport report;
  for (const auto& p : pools) {
    const auto multi = std::count_if(p.attempts.begin(), p.attempts.end(), [](const PoolAttempt& a) {
      return a.n_faces >= 2;
    });
    if (2 * static_cast<std::size_t>(multi) > p.attempts.size()) {
      report.dropped.push_back(p.video_id);
      report.reasons[p.video_id] =
          fmt::format("multi_face: {} of {} attempted frames had 2+ faces", multi, p.attempts.size());
    } else {
      report.kept.push_back(p.video_id);
    }
  }
  return report;
}

json FilterReport::to_json() const {
  return {{"kept", kept}, {"dropped", dropped}, {"reasons", reasons}};
}

}  // namespace idkit
