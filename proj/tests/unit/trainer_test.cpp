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

#include <cmath>
#include <fstream>
#include <map>

#include "idkit/adapter/checkpoint.hpp"
#include "idkit/adapter/encoder.hpp"
#include "idkit/core/error.hpp"
#include "idkit/core/fileio.hpp"
#include "idkit/dataset/pipeline.hpp"
#include "idkit/diffusion/loss.hpp"
#include "idkit/train/trainer.hpp"
#include "test_util.hpp"

namespace idkit {
namespace {

bool same_weights(const AdapterWeights& a, const AdapterWeights& b) {
  const auto fa = a.flatten(), fb = b.flatten();
  if (fa.size() != fb.size()) return false;
  for (const auto& [name, m] : fa) {
    auto it = fb.find(name);
    if (it == fb.end() || !bitwise_equal(m, it->second)) return false;
  }
  return true;
}

std::vector<std::string> metric_lines_without_time(const fs::path& path) {
  std::vector<std::string> out;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    auto j = json::parse(line);
    j.erase("wall_time");
    out.push_back(j.dump());
  }
  return out;
}

// One CI dataset and decoded training data shared by the whole suite.
class TrainerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("trainer");
    root_ = testing::build_ci_dataset(dir_->path());
    backbone_ = new Backbone(BackboneSpec::ci());
    extractor_ = make_extractor(AdapterConfig().extractor).release();
    data_ = new TrainingData(load_training_data(root_ / kManifestName, root_, *backbone_, *extractor_));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete extractor_;
    delete backbone_;
    delete dir_;
  }

  static TrainConfig small_config(int steps) {
    TrainConfig c;
    c.steps = steps;
    c.lr = 1e-3;
    c.seed = 5;
    c.checkpoint_every = 25;
    return c;
  }

  static testing::TempDir* dir_;
  static fs::path root_;
  static Backbone* backbone_;
  static FeatureExtractor* extractor_;
  static TrainingData* data_;
};

testing::TempDir* TrainerTest::dir_ = nullptr;
fs::path TrainerTest::root_;
Backbone* TrainerTest::backbone_ = nullptr;
FeatureExtractor* TrainerTest::extractor_ = nullptr;
TrainingData* TrainerTest::data_ = nullptr;

TEST(TrainConfigTest, DefaultsAndJson) {
  const TrainConfig c;
  EXPECT_EQ(c.lr, 1e-4);
  EXPECT_EQ(c.batch_size, 2);
  EXPECT_EQ(c.null_text_prob, 0.2);
  EXPECT_EQ(c.face_dropout_prob, 0.0);
  const TrainConfig back = TrainConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  const TrainConfig partial = TrainConfig::from_json({{"lr", 0.5}});
  EXPECT_EQ(partial.lr, 0.5);
  EXPECT_EQ(partial.batch_size, 2);

  TrainConfig bad;
  bad.null_text_prob = 1.5;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = TrainConfig();
  bad.lr = -1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = TrainConfig();
  bad.batch_size = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(TrainStepRecordTest, JsonRoundTripIgnoresWallTimeForEquality) {
  TrainStepRecord r;
  r.step = 3;
  r.loss = 0.1234567890123;
  r.ref_crop_ids = {"a/crop_0", ""};
  r.null_text = {false, true};
  r.grad_norm = 2.5;
  r.wall_time = 0.01;
  TrainStepRecord back = TrainStepRecord::from_json(r.to_json());
  EXPECT_TRUE(back.same_result(r));
  back.wall_time = 99;
  EXPECT_TRUE(back.same_result(r));
  back.loss += 1e-12;
  EXPECT_FALSE(back.same_result(r));
}

TEST_F(TrainerTest, LoadsEveryCaptionedRecord) {
  EXPECT_EQ(data_->video_ids.size(), 7u);
  for (std::size_t i = 0; i < data_->video_ids.size(); ++i) {
    EXPECT_FALSE(data_->references[i].empty());
    EXPECT_EQ(data_->latents[i].frames, 8);
    EXPECT_EQ(data_->text[i].rows, backbone_->spec().n_text);
  }
}

TEST_F(TrainerTest, UncaptionedManifestIsRejected) {
  auto records = read_manifest(root_ / kManifestName);
  for (auto& r : records) r.captions.reset(), r.unified_caption.clear();
  testing::TempDir d;
  fs::copy(root_, d.path(), fs::copy_options::recursive);
  write_manifest(records, d / kManifestName);
  EXPECT_THROW(load_training_data(d / kManifestName, d.path(), *backbone_, *extractor_), ConfigError);
}

TEST_F(TrainerTest, NullTextRateAtTheExtremes) {
  for (double p : {0.0, 1.0}) {
    TrainConfig c;
    c.null_text_prob = p;
    int nulls = 0, total = 0;
    for (int s = 0; s < 1000; ++s)
      for (const auto& ex : make_batch(*data_, *backbone_, s, c)) {
        nulls += ex.null_text;
        ++total;
        if (ex.null_text) {
          EXPECT_TRUE(bitwise_equal(ex.text, backbone_->null_text()));
        }
      }
    EXPECT_EQ(nulls, p == 0.0 ? 0 : total);
  }
}

TEST_F(TrainerTest, NullTextRateMatchesProbability) {
  TrainConfig c;
  c.seed = 17;
  int nulls = 0, total = 0;
  for (int s = 0; total < 10000; ++s)
    for (const auto& ex : make_batch(*data_, *backbone_, s, c)) {
      nulls += ex.null_text;
      ++total;
      EXPECT_TRUE(ex.reference.has_value());  // face tokens are never dropped with the caption
    }
  const double rate = static_cast<double>(nulls) / total;
  EXPECT_GE(rate, 0.18);
  EXPECT_LE(rate, 0.22);
}

TEST_F(TrainerTest, ReferenceIsUniformOverThePool) {
  TrainConfig c;
  c.seed = 3;
  std::map<std::string, std::map<std::string, int>> counts;
  for (int s = 0; s < 6000; ++s)
    for (const auto& ex : make_batch(*data_, *backbone_, s, c)) {
      const std::string vid = ex.ref_id.substr(0, ex.ref_id.find('/'));
      counts[vid][ex.ref_id]++;
    }
  for (std::size_t i = 0; i < data_->video_ids.size(); ++i) {
    const auto& per = counts[data_->video_ids[i]];
    const auto k = data_->references[i].size();
    EXPECT_EQ(per.size(), k);
    int n = 0;
    for (const auto& [id, c_] : per) n += c_;
    for (const auto& [id, c_] : per) {
      const double expect = static_cast<double>(n) / static_cast<double>(k);
      // 5 sigma of a binomial count
      EXPECT_NEAR(c_, expect, 5 * std::sqrt(expect)) << id;
    }
  }
}

TEST_F(TrainerTest, ReferenceComesFromTheSameVideo) {
  TrainConfig c;
  for (int s = 0; s < 200; ++s)
    for (const auto& ex : make_batch(*data_, *backbone_, s, c)) {
      const std::string vid = ex.ref_id.substr(0, ex.ref_id.find('/'));
      std::size_t i = 0;
      while (data_->video_ids[i] != vid) ++i;
      EXPECT_TRUE(bitwise_equal(ex.z.to_tokens(), data_->latents[i].to_tokens()));
      EXPECT_EQ(ex.reference->source_id, ex.ref_id);
    }
}

TEST_F(TrainerTest, BatchesDependOnlyOnSeedAndStep) {
  TrainConfig c;
  c.seed = 9;
  const auto a = make_batch(*data_, *backbone_, 41, c);
  for (int s = 0; s < 41; ++s) make_batch(*data_, *backbone_, s, c);
  const auto b = make_batch(*data_, *backbone_, 41, c);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].t, b[i].t);
    EXPECT_EQ(a[i].ref_id, b[i].ref_id);
    EXPECT_EQ(a[i].null_text, b[i].null_text);
    EXPECT_TRUE(bitwise_equal(a[i].eps, b[i].eps));
  }
  c.seed = 10;
  const auto other = make_batch(*data_, *backbone_, 41, c);
  EXPECT_FALSE(bitwise_equal(a[0].eps, other[0].eps));
}

TEST_F(TrainerTest, ZeroLearningRateLeavesWeightsUnchanged) {
  TrainConfig c;
  c.lr = 0.0;
  AdapterWeights w = init_adapter(backbone_->spec(), AdapterConfig());
  const AdapterWeights before = w;
  AdamState opt = AdamState::zeros_like(w);
  const auto checksum = backbone_->checksum();
  for (int s = 0; s < 3; ++s) {
    const TrainStepRecord r = train_step(make_batch(*data_, *backbone_, s, c), w, opt, c, *backbone_);
    EXPECT_GT(r.grad_norm, 0.0);
  }
  EXPECT_TRUE(same_weights(w, before));
  EXPECT_EQ(backbone_->checksum(), checksum);
  EXPECT_EQ(opt.step, 3);
}

TEST_F(TrainerTest, StepChangesOnlyTheAdapter) {
  TrainConfig c = small_config(1);
  AdapterWeights w = init_adapter(backbone_->spec(), AdapterConfig());
  const AdapterWeights before = w;
  AdamState opt = AdamState::zeros_like(w);
  const auto checksum = backbone_->checksum();
  train_step(make_batch(*data_, *backbone_, 0, c), w, opt, c, *backbone_);
  EXPECT_FALSE(same_weights(w, before));
  EXPECT_EQ(backbone_->checksum(), checksum);
  // Parameters stay float32-representable after the update.
  w.for_each([](const std::string&, const Matrix& m) {
    for (double v : m.data) EXPECT_EQ(static_cast<double>(static_cast<float>(v)), v);
  });
}

TEST_F(TrainerTest, TrainableLeavesAreExactlyTheAdapterTensors) {
  TrainConfig c;
  c.null_text_prob = 0.0;
  const AdapterWeights w = init_adapter(backbone_->spec(), AdapterConfig());
  const AdapterVars vars = AdapterVars::from(w, true);
  const auto batch = make_batch(*data_, *backbone_, 0, c);
  const ad::Var loss = training_loss(batch, *backbone_, &vars, &w.config, 1.0);
  const auto leaves = ad::trainable_leaves(loss);
  const auto named = vars.named();
  EXPECT_EQ(leaves.size(), named.size());
  for (const auto& leaf : leaves) {
    int hits = 0;
    for (const auto& [name, v] : named) hits += leaf.same_node(v);
    EXPECT_EQ(hits, 1);
  }
  for (const auto& [name, v] : named) EXPECT_EQ(name.find(kTemporalLayerId), std::string::npos);
}

TEST_F(TrainerTest, NonFiniteBatchLeavesWeightsUntouched) {
  TrainConfig c = small_config(1);
  AdapterWeights w = init_adapter(backbone_->spec(), AdapterConfig());
  const AdapterWeights before = w;
  AdamState opt = AdamState::zeros_like(w);
  auto batch = make_batch(*data_, *backbone_, 0, c);
  batch[0].z.z[0] = std::nan("");
  EXPECT_THROW(train_step(batch, w, opt, c, *backbone_), NumericError);
  EXPECT_TRUE(same_weights(w, before));
  EXPECT_EQ(opt.step, 0);
}

TEST_F(TrainerTest, LoopSkipsPoisonedBatchesAndWritesDiagnostics) {
  TrainingData poisoned = *data_;
  for (auto& z : poisoned.latents) z.z[0] = std::nan("");
  testing::TempDir out;
  TrainConfig c = small_config(5);
  TrainLoopOptions o;
  o.out_dir = out.path();
  const TrainResult r = train_loop(poisoned, *backbone_, AdapterConfig(), c, o);
  EXPECT_EQ(r.bad_steps, 5);
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(fs::exists(out / "diagnostics/step_0.json"));
  const auto diag = read_json(out / "diagnostics/step_4.json");
  EXPECT_EQ(diag["ref_crop_ids"].size(), 2u);
  EXPECT_TRUE(same_weights(r.weights, init_adapter(backbone_->spec(), AdapterConfig())));
}

TEST_F(TrainerTest, ZeroStepsWritesOnlyTheInitialCheckpoint) {
  testing::TempDir out;
  TrainLoopOptions o;
  o.out_dir = out.path();
  const TrainResult r = train_loop(*data_, *backbone_, AdapterConfig(), small_config(0), o);
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.final_checkpoint, checkpoint_path(out.path(), 0));
  EXPECT_EQ(latest_checkpoint_step(out.path()), 0);
  EXPECT_TRUE(read_text(out / "metrics.jsonl").empty());
  const AdapterWeights loaded = load_adapter(r.final_checkpoint, backbone_->spec());
  EXPECT_TRUE(same_weights(loaded, init_adapter(backbone_->spec(), AdapterConfig())));
}

TEST_F(TrainerTest, ResumeMatchesUninterruptedRun) {
  const TrainConfig c = small_config(50);
  testing::TempDir full_dir, split_dir;

  TrainLoopOptions full;
  full.out_dir = full_dir.path();
  const TrainResult a = train_loop(*data_, *backbone_, AdapterConfig(), c, full);
  ASSERT_EQ(a.records.size(), 50u);

  TrainLoopOptions first;
  first.out_dir = split_dir.path();
  first.stop_after = 25;
  const TrainResult b1 = train_loop(*data_, *backbone_, AdapterConfig(), c, first);
  ASSERT_EQ(b1.records.size(), 25u);
  EXPECT_EQ(latest_checkpoint_step(split_dir.path()), 25);

  TrainLoopOptions second;
  second.out_dir = split_dir.path();
  second.resume = "latest";
  const TrainResult b2 = train_loop(*data_, *backbone_, AdapterConfig(), c, second);
  ASSERT_EQ(b2.records.size(), 25u);

  EXPECT_TRUE(same_weights(a.weights, b2.weights));
  for (int i = 0; i < 25; ++i) {
    EXPECT_TRUE(a.records[i].same_result(b1.records[i])) << i;
    EXPECT_TRUE(a.records[25 + i].same_result(b2.records[i])) << i;
  }
  EXPECT_EQ(metric_lines_without_time(full_dir / "metrics.jsonl"),
            metric_lines_without_time(split_dir / "metrics.jsonl"));
  EXPECT_EQ(read_bytes(checkpoint_path(full_dir.path(), 50)), read_bytes(checkpoint_path(split_dir.path(), 50)));
  EXPECT_TRUE(std::isfinite(a.records.back().loss));
}

TEST_F(TrainerTest, ResumeDiscardsMetricsPastTheCheckpoint) {
  const TrainConfig c = small_config(30);
  testing::TempDir out;
  TrainLoopOptions o;
  o.out_dir = out.path();
  train_loop(*data_, *backbone_, AdapterConfig(), c, o);
  EXPECT_EQ(metric_lines_without_time(out / "metrics.jsonl").size(), 30u);
  o.resume = "25";
  const TrainResult r = train_loop(*data_, *backbone_, AdapterConfig(), c, o);
  EXPECT_EQ(r.records.size(), 5u);
  const auto lines = metric_lines_without_time(out / "metrics.jsonl");
  ASSERT_EQ(lines.size(), 30u);
  for (int i = 0; i < 30; ++i) EXPECT_EQ(json::parse(lines[i])["step"], i + 1);
}

TEST_F(TrainerTest, ResumeWithoutCheckpointFails) {
  testing::TempDir out;
  TrainLoopOptions o;
  o.out_dir = out.path();
  o.resume = "latest";
  EXPECT_THROW(train_loop(*data_, *backbone_, AdapterConfig(), small_config(5), o), CheckpointError);
}

TEST_F(TrainerTest, AdamStateRoundTrip) {
  TrainConfig c = small_config(2);
  AdapterWeights w = init_adapter(backbone_->spec(), AdapterConfig());
  AdamState opt = AdamState::zeros_like(w);
  train_step(make_batch(*data_, *backbone_, 0, c), w, opt, c, *backbone_);
  testing::TempDir d;
  opt.save(d / "a.opt");
  const AdamState back = AdamState::load(d / "a.opt");
  EXPECT_EQ(back.step, 1);
  ASSERT_EQ(back.m.size(), opt.m.size());
  for (const auto& [name, m] : opt.m) {
    EXPECT_TRUE(bitwise_equal(m, back.m.at(name)));
    EXPECT_TRUE(bitwise_equal(opt.v.at(name), back.v.at(name)));
  }
  auto bytes = read_bytes(d / "a.opt");
  bytes.resize(bytes.size() / 2);
  write_atomic(d / "b.opt", bytes);
  EXPECT_THROW(AdamState::load(d / "b.opt"), CheckpointError);
}

TEST_F(TrainerTest, OptimizerStateMustMatchAdapter) {
  TrainConfig c = small_config(1);
  AdapterWeights w = init_adapter(backbone_->spec(), AdapterConfig());
  AdamState opt;
  EXPECT_THROW(train_step(make_batch(*data_, *backbone_, 0, c), w, opt, c, *backbone_), ArgumentError);
}

}  // namespace
}  // namespace idkit
