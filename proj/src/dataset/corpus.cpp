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

#include "idkit/dataset/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "idkit/core/error.hpp"
#include "idkit/core/fileio.hpp"
#include "idkit/core/hash.hpp"
#include "idkit/core/rng.hpp"
#include "idkit/io/image_io.hpp"

namespace idkit {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError("corpus spec: field '" + field + "' " + what);
}

std::array<float, 3> hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h * 6.0, 6.0);
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = v - c;
  return {static_cast<float>(r + m), static_cast<float>(g + m), static_cast<float>(b + m)};
}

// Position along [lo, hi] after bouncing off both ends.
double reflect(double p, double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0) return lo;
  double u = std::fmod(p - lo, 2.0 * span);
  if (u < 0) u += 2.0 * span;
  return lo + (u <= span ? u : 2.0 * span - u);
}

}  // namespace

void CorpusSpec::validate() const {
  require(frames >= 1, "frames", "must be >= 1");
  require(height >= 8, "height", "must be >= 8");
  require(width >= 8, "width", "must be >= 8");
  const int r = radius > 0 ? radius : std::min(height, width) / 8;
  require(r >= 2, "radius", "must be >= 2");
  require(4 * r + 4 <= width && 2 * r + 2 <= height, "radius", "is too large for the frame");
  std::set<std::string> ids;
  for (const auto& v : videos) {
    require(!v.id.empty(), "videos[].id", "must be nonempty");
    require(v.id.find_first_of("/\\") == std::string::npos && v.id != "." && v.id != "..", "videos[].id",
            "must be a plain name");
    require(ids.insert(v.id).second, "videos[].id", "duplicates '" + v.id + "'");
    require(v.faces >= 0 && v.faces <= 2, "videos[].faces", "must be 0, 1 or 2");
    if (!v.faces_per_frame.empty()) {
      require(static_cast<int>(v.faces_per_frame.size()) == frames, "videos[].faces_per_frame",
              "must have one entry per frame");
      for (int f : v.faces_per_frame) require(f >= 0 && f <= 2, "videos[].faces_per_frame", "entries must be 0..2");
    }
  }
}

int CorpusSpec::face_count(const SyntheticVideoSpec& v, int frame) const {
  return v.faces_per_frame.empty() ? v.faces : v.faces_per_frame[static_cast<std::size_t>(frame)];
}

nlohmann::json CorpusSpec::to_json() const {
  nlohmann::json vids = nlohmann::json::array();
  for (const auto& v : videos) {
    nlohmann::json e{{"id", v.id}, {"faces", v.faces}};
    if (!v.faces_per_frame.empty()) e["faces_per_frame"] = v.faces_per_frame;
    vids.push_back(e);
  }
  return {{"frames", frames}, {"height", height}, {"width", width}, {"radius", radius}, {"videos", vids}};
}

CorpusSpec CorpusSpec::uniform(int count, int multi_face, int frames, int height, int width) {
  if (count < 0 || multi_face < 0 || multi_face > count)
    throw ConfigError("corpus spec: field 'multi_face' must be between 0 and count");
  CorpusSpec s;
  s.frames = frames;
  s.height = height;
  s.width = width;
  // Spread the two-face videos evenly through the list.
  for (int i = 0; i < count; ++i) {
    const bool two = multi_face > 0 && (i * multi_face) / count != ((i + 1) * multi_face) / count;
    s.videos.push_back({fmt::format("vid_{:03d}", i), two ? 2 : 1, {}});
  }
  return s;
}

CorpusSpec CorpusSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("corpus spec: must be a JSON object");
  auto get_int = [&](const char* key, int def) {
    if (!j.contains(key)) return def;
    require(j[key].is_number_integer(), key, "must be an integer");
    return j[key].get<int>();
  };
  CorpusSpec s;
  if (j.contains("videos")) {
    require(j["videos"].is_array(), "videos", "must be an array");
    s.frames = get_int("frames", s.frames);
    s.height = get_int("height", s.height);
    s.width = get_int("width", s.width);
    for (const auto& e : j["videos"]) {
      require(e.is_object() && e.contains("id") && e["id"].is_string(), "videos[].id", "must be a string");
      SyntheticVideoSpec v;
      v.id = e["id"].get<std::string>();
      if (e.contains("faces")) {
        require(e["faces"].is_number_integer(), "videos[].faces", "must be an integer");
        v.faces = e["faces"].get<int>();
      }
      if (e.contains("faces_per_frame")) {
        require(e["faces_per_frame"].is_array(), "videos[].faces_per_frame", "must be an array");
        for (const auto& f : e["faces_per_frame"]) {
          require(f.is_number_integer(), "videos[].faces_per_frame", "entries must be integers");
          v.faces_per_frame.push_back(f.get<int>());
        }
      }
      s.videos.push_back(std::move(v));
    }
  } else {
    require(j.contains("count"), "count", "is required when 'videos' is absent");
    s = uniform(get_int("count", 0), get_int("multi_face", 0), get_int("frames", s.frames),
                get_int("height", s.height), get_int("width", s.width));
  }
  s.radius = get_int("radius", 0);
  s.validate();
  return s;
}

SyntheticCorpus generate_synthetic_corpus(const CorpusSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int r = spec.radius > 0 ? spec.radius : std::min(spec.height, spec.width) / 8;
  SyntheticCorpus out;
  out.ground_truth = {{"seed", seed}, {"spec", spec.to_json()}, {"videos", nlohmann::json::array()}};

  for (const auto& vs : spec.videos) {
    Rng rng = make_rng(seed, {fnv1a(vs.id)});
    const double hue = uniform01(rng);
    const double sat = 0.6 + 0.4 * uniform01(rng);
    std::array<std::array<float, 3>, 2> colors{hsv_to_rgb(hue, sat, 1.0),
                                               hsv_to_rgb(std::fmod(hue + 0.5, 1.0), sat, 1.0)};
    std::array<float, 3> bg{};
    for (auto& c : bg) c = static_cast<float>(0.08 + 0.22 * uniform01(rng));

    // Face k lives in its own horizontal half so two faces never touch.
    struct Track {
      double x, y, vx, vy, xlo, xhi, ylo, yhi;
    };
    std::array<Track, 2> tracks{};
    for (int k = 0; k < 2; ++k) {
      auto& t = tracks[static_cast<std::size_t>(k)];
      const double half = spec.width / 2.0;
      t.xlo = k * half + r + 1;
      t.xhi = (k + 1) * half - r - 1;
      t.ylo = r + 1;
      t.yhi = spec.height - r - 1;
      t.x = t.xlo + (t.xhi - t.xlo) * uniform01(rng);
      t.y = t.ylo + (t.yhi - t.ylo) * uniform01(rng);
      t.vx = (uniform01(rng) - 0.5) * 0.3 * r;
      t.vy = (uniform01(rng) - 0.5) * 0.3 * r;
    }

    RawVideo video{vs.id, Video(spec.frames, spec.height, spec.width)};
    nlohmann::json faces = nlohmann::json::array();
    std::vector<int> per_frame;
    int multi = 0;
    for (int f = 0; f < spec.frames; ++f) {
      for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
          const float shade = 0.85f + 0.15f * static_cast<float>(y) / static_cast<float>(spec.height);
          for (int c = 0; c < 3; ++c) video.frames.at(f, y, x, c) = bg[static_cast<std::size_t>(c)] * shade;
        }
      const int n = spec.face_count(vs, f);
      per_frame.push_back(n);
      if (n >= 2) ++multi;
      for (int k = 0; k < n; ++k) {
        const auto& t = tracks[static_cast<std::size_t>(k)];
        const double cx = reflect(t.x + t.vx * f, t.xlo, t.xhi);
        const double cy = reflect(t.y + t.vy * f, t.ylo, t.yhi);
        const auto& col = colors[static_cast<std::size_t>(k)];
        for (int y = static_cast<int>(cy - r) - 1; y <= static_cast<int>(cy + r) + 1; ++y)
          for (int x = static_cast<int>(cx - r) - 1; x <= static_cast<int>(cx + r) + 1; ++x) {
            if (y < 0 || x < 0 || y >= spec.height || x >= spec.width) continue;
            const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
            if (d > r) continue;
            const float s = static_cast<float>(0.85 + 0.15 * (1.0 - d / r));
            for (int c = 0; c < 3; ++c) video.frames.at(f, y, x, c) = col[static_cast<std::size_t>(c)] * s;
          }
        faces.push_back({{"frame", f}, {"face", k}, {"cx", cx}, {"cy", cy}, {"r", r}});
      }
    }
    out.ground_truth["videos"].push_back({{"id", vs.id},
                                          {"multi_face", 2 * multi > spec.frames},
                                          {"faces_per_frame", per_frame},
                                          {"identity_colors", colors},
                                          {"background", bg},
                                          {"faces", faces}});
    out.videos.push_back(std::move(video));
  }
  return out;
}

void write_corpus(const std::filesystem::path& dir, const SyntheticCorpus& corpus) {
  for (const auto& v : corpus.videos) write_frames(dir / "videos" / v.video_id, v.frames);
  write_json(dir / "ground_truth.json", corpus.ground_truth);
}

std::vector<std::string> list_corpus_videos(const std::filesystem::path& dir) {
  std::vector<std::string> ids;
  const auto root = dir / "videos";
  if (!std::filesystem::is_directory(root)) return ids;
  for (const auto& e : std::filesystem::directory_iterator(root))
    if (e.is_directory()) ids.push_back(e.path().filename().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

RawVideo load_raw_video(const std::filesystem::path& corpus_dir, const std::string& video_id) {
  const auto dir = corpus_dir / "videos" / video_id;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no frames in " + dir.string());
  RawVideo out{video_id, {}};
  for (std::size_t i = 0; i < files.size(); ++i) {
    Image img = read_png(files[i]);
    if (i == 0) out.frames = Video(static_cast<int>(files.size()), img.height, img.width);
    if (img.height != out.frames.height || img.width != out.frames.width)
      throw IoError(files[i].string() + ": frame size differs from the first frame");
    out.frames.set_frame(static_cast<int>(i), img);
  }
  return out;
}

}  // namespace idkit
