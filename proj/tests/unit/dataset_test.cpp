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

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <set>

#include "idkit/core/error.hpp"
#include "idkit/core/fileio.hpp"
#include "idkit/core/hash.hpp"
#include "idkit/dataset/corpus.hpp"
#include "idkit/dataset/detector.hpp"
#include "idkit/dataset/pipeline.hpp"
#include "idkit/io/image_io.hpp"
#include "test_util.hpp"

namespace idkit {
namespace {

const nlohmann::json& truth_for(const SyntheticCorpus& c, const std::string& id) {
  for (const auto& v : c.ground_truth["videos"])
    if (v["id"] == id) return v;
  throw std::runtime_error("no ground truth for " + id);
}

SyntheticCorpus one_video(std::vector<int> faces_per_frame, std::uint64_t seed = 3) {
  CorpusSpec spec;
  spec.frames = static_cast<int>(faces_per_frame.size());
  spec.videos = {{"v", 1, std::move(faces_per_frame)}};
  return generate_synthetic_corpus(spec, seed);
}

// Corpus

TEST(Corpus, SeededAndCounted) {
  CorpusSpec spec = CorpusSpec::uniform(3, 1);
  const auto a = generate_synthetic_corpus(spec, 5), b = generate_synthetic_corpus(spec, 5);
  ASSERT_EQ(a.videos.size(), 3u);
  EXPECT_EQ(a.ground_truth["videos"].size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.videos[i].frames.data, b.videos[i].frames.data);
  EXPECT_EQ(a.ground_truth, b.ground_truth);
  EXPECT_NE(generate_synthetic_corpus(spec, 6).videos[0].frames.data, a.videos[0].frames.data);
  int flagged = 0;
  for (const auto& v : a.ground_truth["videos"]) flagged += v["multi_face"].get<bool>();
  EXPECT_EQ(flagged, 1);
}

TEST(Corpus, SpecValidationNamesField) {
  CorpusSpec spec = CorpusSpec::uniform(2, 0);
  spec.frames = 0;
  try {
    spec.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("frames"), std::string::npos);
  }
  EXPECT_THROW(CorpusSpec::from_json({{"videos", {{{"id", "a"}, {"faces", "two"}}}}}), ConfigError);
  EXPECT_THROW(CorpusSpec::from_json({{"count", 2}, {"multi_face", 3}}), ConfigError);
  const CorpusSpec listed = CorpusSpec::from_json({{"frames", 4}, {"videos", {{{"id", "a"}, {"faces", 2}}}}});
  ASSERT_EQ(listed.videos.size(), 1u);
  EXPECT_EQ(listed.videos[0].faces, 2);
  EXPECT_EQ(CorpusSpec::from_json(listed.to_json()).to_json(), listed.to_json());
}

TEST(Corpus, WriteAndReload) {
  testing::TempDir dir;
  const auto c = generate_synthetic_corpus(CorpusSpec::uniform(2, 0, 4, 24, 32), 1);
  write_corpus(dir.path(), c);
  EXPECT_TRUE(fs::exists(dir / "ground_truth.json"));
  EXPECT_EQ(list_corpus_videos(dir.path()), (std::vector<std::string>{"vid_000", "vid_001"}));
  const RawVideo v = load_raw_video(dir.path(), "vid_001");
  ASSERT_EQ(v.frames.frames, 4);
  for (std::size_t i = 0; i < v.frames.data.size(); ++i)
    ASSERT_EQ(to_u8(v.frames.data[i]), to_u8(c.videos[1].frames.data[i]));
}

// Detector

TEST(Detector, MatchesGroundTruthOnEveryFrame) {
  const auto c = generate_synthetic_corpus(CorpusSpec::uniform(6, 2), 9);
  DiskDetector det;
  for (const auto& v : c.videos) {
    const auto& gt = truth_for(c, v.video_id);
    for (int f = 0; f < v.frames.frames; ++f) {
      const auto boxes = detect_faces(v.frames.frame(f), f, det);
      ASSERT_EQ(static_cast<int>(boxes.size()), gt["faces_per_frame"][f].get<int>()) << v.video_id << " frame " << f;
      for (std::size_t i = 1; i < boxes.size(); ++i) EXPECT_GE(boxes[i - 1].confidence, boxes[i].confidence);
      for (const auto& face : gt["faces"]) {
        if (face["frame"] != f) continue;
        const double cx = face["cx"], cy = face["cy"];
        const bool inside = std::any_of(boxes.begin(), boxes.end(), [&](const FaceBox& b) {
          return b.x0 <= cx && cx < b.x1 && b.y0 <= cy && cy < b.y1;
        });
        EXPECT_TRUE(inside) << v.video_id << " frame " << f;
      }
      for (const auto& b : boxes) {
        EXPECT_TRUE(b.valid_for(v.frames.width, v.frames.height));
        EXPECT_EQ(b.frame_index, f);
      }
    }
  }
}

TEST(Detector, BlankFrameHasNoFaces) {
  DiskDetector det;
  EXPECT_TRUE(detect_faces(Image(32, 32, 0.2f), 0, det).empty());
}

class BrokenDetector : public FaceDetector {
 public:
  std::string name() const override { return "broken"; }
  std::vector<FaceBox> detect(const Image&) const override { throw std::runtime_error("model crashed"); }
};

TEST(Detector, BackendFailureNamesFrame) {
  BrokenDetector det;
  try {
    detect_faces(Image(8, 8), 41, det);
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_NE(std::string(e.what()).find("41"), std::string::npos);
  }
  EXPECT_THROW(detect_faces(Image(8, 8, 2.0f), 0, DiskDetector()), ArgumentError);
}

// Clipping

TEST(Clip, SquareInputOfExactLengthIsUnchanged) {
  RawVideo v{"sq", Video(16, 512, 512)};
  for (std::size_t i = 0; i < v.frames.data.size(); ++i) v.frames.data[i] = static_cast<float>(i % 251) / 250.0f;
  Rng rng = make_rng(1, {});
  EXPECT_EQ(clip_and_resize(v, 16, 512, rng).data, v.frames.data);
}

TEST(Clip, WideInputKeepsCenterColumns) {
  // Channel 0 encodes the column, channel 1 the frame.
  RawVideo v{"wide", Video(32, 512, 1024)};
  for (int f = 0; f < 32; ++f)
    for (int y = 0; y < 512; ++y)
      for (int x = 0; x < 1024; ++x) {
        v.frames.at(f, y, x, 0) = static_cast<float>(x) / 1023.0f;
        v.frames.at(f, y, x, 1) = static_cast<float>(f) / 31.0f;
      }
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng = make_rng(seed, {});
    const Video out = clip_and_resize(v, 16, 512, rng);
    ASSERT_EQ(out.frames, 16);
    ASSERT_EQ(out.height, 512);
    ASSERT_EQ(out.width, 512);
    const int start = static_cast<int>(std::lround(out.at(0, 0, 0, 1) * 31.0f));
    EXPECT_LE(start, 16);
    std::set<int> cols;
    for (int f = 0; f < 16; ++f) {
      EXPECT_EQ(std::lround(out.at(f, 7, 0, 1) * 31.0f), start + f);
      for (int x = 0; x < 512; ++x) cols.insert(static_cast<int>(std::lround(out.at(f, 100, x, 0) * 1023.0f)));
    }
    EXPECT_EQ(*cols.begin(), 256);
    EXPECT_EQ(*cols.rbegin(), 767);
    EXPECT_EQ(cols.size(), 512u);
  }
}

TEST(Clip, TooShortIsSkipped) {
  RawVideo v{"short", Video(8, 16, 16)};
  Rng rng = make_rng(1, {});
  EXPECT_THROW(clip_and_resize(v, 16, 16, rng), SkipRecordError);
}

TEST(Clip, ShapeContractForAnyConfig) {
  RawVideo v{"x", Video(20, 30, 50, 0.3f)};
  for (int len : {1, 5, 20})
    for (int size : {1, 16, 37, 64}) {
      Rng rng = make_rng(len, {static_cast<std::uint64_t>(size)});
      const Video out = clip_and_resize(v, len, size, rng);
      EXPECT_EQ(out.frames, len);
      EXPECT_EQ(out.height, size);
      EXPECT_EQ(out.width, size);
      EXPECT_EQ(out.data.size(), static_cast<std::size_t>(len) * size * size * 3);
    }
}

TEST(Clip, FaceCropIsSquareAndClamped) {
  Image frame(40, 60, 0.1f);
  FaceBox box{0, 0, 0, 10, 10, 1.0};
  const Image c = face_crop(frame, box, 0.2, 24);
  EXPECT_EQ(c.height, 24);
  EXPECT_EQ(c.width, 24);
}

// Face pools

TEST(Pool, AllSingleFaceFramesGiveFiveDistinctFrames) {
  const auto c = one_video(std::vector<int>(20, 1));
  DiskDetector det;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_rng(seed, {});
    const FacePool p = build_face_pool(c.videos[0], det, rng, PoolConfig{});
    ASSERT_EQ(p.size(), 5u);
    EXPECT_EQ(std::set<int>(p.source_frames.begin(), p.source_frames.end()).size(), 5u);
    for (const auto& crop : p.crops) {
      EXPECT_EQ(crop.height, 224);
      EXPECT_EQ(crop.width, 224);
    }
  }
}

TEST(Pool, TwoFaceFramesNeverContribute) {
  std::vector<int> faces(20, 1);
  std::fill(faces.begin(), faces.begin() + 10, 2);
  const auto c = one_video(faces);
  DiskDetector det;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(seed, {});
    const FacePool p = build_face_pool(c.videos[0], det, rng, PoolConfig{});
    EXPECT_EQ(p.size(), 5u);
    for (int f : p.source_frames) EXPECT_GE(f, 10);
    for (const auto& a : p.attempts)
      if (a.n_faces != 1)
        EXPECT_EQ(std::count(p.source_frames.begin(), p.source_frames.end(), a.frame), 0);
  }
}

TEST(Pool, BlankVideoRaisesEmptyPool) {
  const auto c = one_video(std::vector<int>(12, 0));
  Rng rng = make_rng(0, {});
  EXPECT_THROW(build_face_pool(c.videos[0], DiskDetector(), rng, PoolConfig{}), EmptyPoolError);
  Rng rng2 = make_rng(0, {});
  const FacePool p = collect_face_pool(c.videos[0], DiskDetector(), rng2, PoolConfig{});
  EXPECT_TRUE(p.empty());
  EXPECT_EQ(p.attempts.size(), 12u);  // budget 15 clipped to the frame count
}

TEST(Pool, AttemptBudgetIsRespected) {
  std::vector<int> faces(30, 2);
  faces[29] = 1;
  const auto c = one_video(faces);
  PoolConfig cfg;
  cfg.pool_target = 2;
  Rng rng = make_rng(4, {});
  const FacePool p = collect_face_pool(c.videos[0], DiskDetector(), rng, cfg);
  EXPECT_LE(p.attempts.size(), 6u);
}

TEST(Pool, SaveLoadRoundTrip) {
  testing::TempDir dir;
  const auto c = one_video(std::vector<int>(10, 1));
  Rng rng = make_rng(2, {});
  PoolConfig cfg;
  cfg.ref_size = 16;
  const FacePool p = build_face_pool(c.videos[0], DiskDetector(), rng, cfg);
  save_pool(dir / "pool", p);
  const FacePool back = load_pool(dir / "pool");
  EXPECT_EQ(back.video_id, p.video_id);
  EXPECT_EQ(back.source_frames, p.source_frames);
  ASSERT_EQ(back.size(), p.size());
  ASSERT_EQ(back.attempts.size(), p.attempts.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(back.boxes[i].x0, p.boxes[i].x0);
    for (std::size_t k = 0; k < p.crops[i].rgb.size(); ++k)
      ASSERT_EQ(to_u8(back.crops[i].rgb[k]), to_u8(p.crops[i].rgb[k]));
  }
}

// Random reference

TEST(Reference, SingleCropPoolAlwaysReturnsIt) {
  Rng rng = make_rng(1, {});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_random_reference(1, rng), 0);
  FacePool empty;
  EXPECT_THROW(sample_random_reference(empty, rng), ArgumentError);
}

TEST(Reference, UniformOverFiveCrops) {
  Rng rng = make_rng(7, {});
  const int n = 10000;
  std::array<int, 5> counts{};
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(sample_random_reference(5, rng))];
  double chi2 = 0.0;
  for (int c : counts) {
    const double freq = static_cast<double>(c) / n;
    EXPECT_GE(freq, 0.17);
    EXPECT_LE(freq, 0.23);
    chi2 += (c - n / 5.0) * (c - n / 5.0) / (n / 5.0);
  }
  // Upper 1% point of chi-square with 4 degrees of freedom.
  EXPECT_LT(chi2, 13.2767);
}

TEST(Reference, SeededSequenceIsReproducible) {
  Rng a = make_rng(3, {1}), b = make_rng(3, {1});
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_random_reference(5, a), sample_random_reference(5, b));
}

// Filtering

FacePool pool_with(const std::string& id, std::vector<int> faces_per_attempt) {
  FacePool p;
  p.video_id = id;
  for (std::size_t i = 0; i < faces_per_attempt.size(); ++i)
    p.attempts.push_back({static_cast<int>(i), faces_per_attempt[i]});
  return p;
}

TEST(Filter, MajorityRule) {
  EXPECT_TRUE(filter_multi_face_videos({}).kept.empty());
  const auto r = filter_multi_face_videos(
      {pool_with("a", {1, 1, 1}), pool_with("b", {2, 2, 1}), pool_with("c", {2, 1}), pool_with("d", {2, 2, 2, 0})});
  EXPECT_EQ(r.kept, (std::vector<std::string>{"a", "c"}));
  EXPECT_EQ(r.dropped, (std::vector<std::string>{"b", "d"}));
  EXPECT_TRUE(r.reasons.count("b"));
}

TEST(Filter, TenVideosThreeTwoPersonKeepsSeven) {
  const auto c = generate_synthetic_corpus(CorpusSpec::uniform(10, 3), 2);
  std::vector<FacePool> pools;
  for (const auto& v : c.videos) {
    Rng rng = make_rng(1, {fnv1a(v.video_id)});
    pools.push_back(collect_face_pool(v, DiskDetector(), rng, PoolConfig{}));
  }
  const auto r = filter_multi_face_videos(pools);
  EXPECT_EQ(r.kept.size(), 7u);
  EXPECT_EQ(r.dropped.size(), 3u);
  for (const auto& id : r.dropped) EXPECT_TRUE(truth_for(c, id)["multi_face"].get<bool>());
  const auto singles = generate_synthetic_corpus(CorpusSpec::uniform(4, 0), 2);
  pools.clear();
  for (const auto& v : singles.videos) {
    Rng rng = make_rng(1, {});
    pools.push_back(collect_face_pool(v, DiskDetector(), rng, PoolConfig{}));
  }
  EXPECT_EQ(filter_multi_face_videos(pools).kept.size(), 4u);
}

// Manifest

std::vector<DatasetRecord> three_records() {
  std::vector<DatasetRecord> rs;
  for (int i = 0; i < 3; ++i) {
    DatasetRecord r;
    r.video_id = "v" + std::to_string(i);
    r.clip_path = "clips/v" + std::to_string(i) + ".clip";
    r.face_pool_path = "pools/v" + std::to_string(i);
    r.n_pool = i + 1;
    r.unified_caption = i == 1 ? "caf\xc3\xa9 {braces} \"quoted\"" : "";
    if (i == 2) r.captions = CaptionTriple{"attr", "act", "unified", {{"k", 1}}};
    rs.push_back(r);
  }
  return rs;
}

TEST(Manifest, RoundTrip) {
  testing::TempDir dir;
  const auto rs = three_records();
  write_manifest(rs, dir / "m.jsonl");
  EXPECT_EQ(read_manifest(dir / "m.jsonl"), rs);
  write_manifest({}, dir / "empty.jsonl");
  EXPECT_TRUE(read_manifest(dir / "empty.jsonl").empty());
}

TEST(Manifest, BadLineIsNamed) {
  testing::TempDir dir;
  write_manifest(three_records(), dir / "m.jsonl");
  std::string text = read_text(dir / "m.jsonl");
  const auto first_nl = text.find('\n');
  const auto second_nl = text.find('\n', first_nl + 1);
  text.replace(first_nl + 1, second_nl - first_nl - 1, "{not json");
  write_atomic(dir / "bad.jsonl", text);
  try {
    read_manifest(dir / "bad.jsonl");
    FAIL();
  } catch (const ManifestError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  write_atomic(dir / "dup.jsonl", std::string(R"({"video_id":"a","clip_path":"c","face_pool_path":"p","n_pool":1,"unified_caption":""}
{"video_id":"a","clip_path":"c","face_pool_path":"p","n_pool":1,"unified_caption":""}
)"));
  EXPECT_THROW(read_manifest(dir / "dup.jsonl"), ManifestError);
  write_atomic(dir / "abs.jsonl", std::string(R"({"video_id":"a","clip_path":"/etc/passwd","face_pool_path":"p","n_pool":1,"unified_caption":""}
)"));
  EXPECT_THROW(read_manifest(dir / "abs.jsonl"), ManifestError);
}

TEST(Manifest, RootValidationChecksFilesAndPoolSize) {
  testing::TempDir dir;
  const fs::path root = testing::build_ci_dataset(dir.path());
  auto records = read_manifest(root / kManifestName, root);
  ASSERT_FALSE(records.empty());
  records[0].n_pool += 1;
  write_manifest(records, dir / "wrong.jsonl");
  EXPECT_THROW(read_manifest(dir / "wrong.jsonl", root), ManifestError);
  records[0].n_pool -= 1;
  fs::remove(root / records[0].clip_path);
  write_manifest(records, dir / "missing.jsonl");
  EXPECT_THROW(read_manifest(dir / "missing.jsonl", root), ManifestError);
}

// Build

TEST(Build, CiPresetKeepsSevenOfTen) {
  testing::TempDir dir;
  const fs::path root = testing::build_ci_dataset(dir.path());
  const auto records = read_manifest(root / kManifestName, root);
  EXPECT_EQ(records.size(), 7u);
  const auto report = read_json(root / "filter_report.json");
  EXPECT_EQ(report["kept"].size(), 7u);
  EXPECT_EQ(report["dropped"].size(), 3u);
  const auto truth = read_json(dir / "corpus" / "ground_truth.json");
  for (const auto& r : records) {
    EXPECT_EQ(read_clip_shape(root / r.clip_path), (std::array<int, 4>{8, 64, 64, 3}));
    const FacePool p = load_pool(root / r.face_pool_path);
    EXPECT_GE(p.size(), 1u);
    EXPECT_LE(p.size(), 3u);
    EXPECT_EQ(static_cast<int>(p.size()), r.n_pool);
    for (const auto& crop : p.crops) EXPECT_EQ(crop.height, 32);
    // Every pooled frame shows exactly one planted face in the ground truth.
    for (const auto& v : truth["videos"])
      if (v["id"] == r.video_id)
        for (int f : p.source_frames) EXPECT_EQ(v["faces_per_frame"][f], 1);
  }
}

TEST(Build, DeterministicAndPoolTargetPlumbed) {
  testing::TempDir dir;
  write_corpus(dir / "corpus", generate_synthetic_corpus(CorpusSpec::uniform(4, 1), 3));
  DatasetConfig cfg = DatasetConfig::ci();
  cfg.pool.pool_target = 2;
  build_dataset(dir / "corpus", dir / "a", cfg, DiskDetector());
  build_dataset(dir / "corpus", dir / "b", cfg, DiskDetector());
  EXPECT_EQ(read_text(dir / "a" / kManifestName), read_text(dir / "b" / kManifestName));
  for (const auto& r : read_manifest(dir / "a" / kManifestName, dir / "a")) {
    EXPECT_LE(r.n_pool, 2);
    EXPECT_EQ(read_bytes(dir / "a" / r.clip_path), read_bytes(dir / "b" / r.clip_path));
  }
}

TEST(Build, EmptyCorpusGivesEmptyManifest) {
  testing::TempDir dir;
  fs::create_directories(dir / "corpus" / "videos");
  const auto report = build_dataset(dir / "corpus", dir / "out", DatasetConfig::ci(), DiskDetector());
  EXPECT_TRUE(report.records.empty());
  EXPECT_TRUE(read_manifest(dir / "out" / kManifestName).empty());
}

TEST(Build, DataRootResolution) {
  EXPECT_EQ(resolve_data_root(std::string("/x/y")), fs::path("/x/y"));
  ::setenv("ID_KIT_DATA_ROOT", "/from/env", 1);
  EXPECT_EQ(resolve_data_root(std::nullopt), fs::path("/from/env"));
  ::unsetenv("ID_KIT_DATA_ROOT");
  EXPECT_EQ(resolve_data_root(std::nullopt), fs::current_path());
}

TEST(Build, ConfigPresets) {
  const auto p = DatasetConfig::full_scale();
  EXPECT_EQ(p.clip_length, 16);
  EXPECT_EQ(p.size, 512);
  EXPECT_EQ(p.pool.pool_target, 5);
  EXPECT_EQ(p.pool.ref_size, 224);
  EXPECT_EQ(p.pool.attempts_budget(), 15);
  const auto c = DatasetConfig::ci();
  EXPECT_EQ(c.clip_length, 8);
  EXPECT_EQ(c.size, 64);
  EXPECT_EQ(c.pool.pool_target, 3);
  EXPECT_EQ(c.pool.ref_size, 32);
}

}  // namespace
}  // namespace idkit
