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
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "idkit/caption/clients.hpp"
#include "idkit/core/error.hpp"
#include "idkit/core/video.hpp"
#include "idkit/dataset/types.hpp"

namespace idkit {

int median_frame(int frames);
// floor(i * frames / k) for i < k, or every frame when frames <= k.
std::vector<int> even_subsample(int frames, int k);

// A caption stage that gave up. Carries the stage name and attempt count.
class StageError : public Error {
 public:
  StageError(std::string video_id, std::string stage, int attempts, const std::string& what)
      : Error(video_id + ": " + stage + " failed after " + std::to_string(attempts) + " attempt(s): " + what),
        video_id_(std::move(video_id)),
        stage_(std::move(stage)),
        attempts_(attempts),
        reason_(what) {}
  const std::string& video_id() const { return video_id_; }
  const std::string& stage() const { return stage_; }
  int attempts() const { return attempts_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string video_id_;
  std::string stage_;
  int attempts_;
  std::string reason_;
};

struct StageResult {
  std::string text;
  int attempts = 1;
  int retries() const { return attempts - 1; }
  nlohmann::json provenance = nlohmann::json::object();
};

// Transport errors (BackendError) are retried per `policy`; empty responses
// raise ContentError wrapped in StageError without retrying.
StageResult attribute_caption(const Video& clip, ImageCaptioner& client, const RetryPolicy& policy,
                              const std::string& video_id);
StageResult action_caption(const Video& clip, VideoCaptioner& client, const RetryPolicy& policy,
                           const std::string& video_id);
StageResult unify_captions(const std::string& attribute, const std::string& action, TextUnifier& client,
                           const RetryPolicy& policy, const std::string& video_id);

// Keeps the first `max_tokens` whitespace-separated words.
std::string truncate_tokens(const std::string& text, int max_tokens);

struct CaptionOptions {
  std::filesystem::path root;            // clip paths resolve against this
  std::filesystem::path manifest_out;    // rewritten after every completed record
  std::filesystem::path quarantine_out;  // JSONL {video_id, stage, error, attempt_count}
  int concurrency = 2;
  // ISO-8601 timestamp source; defaults to SOURCE_DATE_EPOCH when set, else
  // the wall clock.
  std::function<std::string()> clock;
};

struct CaptionSummary {
  int records = 0;
  int captioned = 0;    // completed in this run
  int skipped = 0;      // already complete
  int quarantined = 0;
  int client_calls = 0;  // attempts issued in this run
  nlohmann::json to_json() const;
};

// Captions every record that lacks a complete triple. Failures are written to
// the quarantine file and never abort the run.
CaptionSummary caption_corpus(std::vector<DatasetRecord>& records, const CaptionClients& clients,
                              const CaptionOptions& options);

std::string iso_timestamp_now();

}  // namespace idkit
