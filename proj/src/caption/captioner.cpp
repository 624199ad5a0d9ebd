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

#include "idkit/caption/captioner.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "idkit/caption/template.hpp"
#include "idkit/core/fileio.hpp"
#include "idkit/dataset/pipeline.hpp"
#include "idkit/io/image_io.hpp"

namespace idkit {

int median_frame(int frames) {
  if (frames < 1) throw ArgumentError("clip is empty");
  return frames / 2;
}

std::vector<int> even_subsample(int frames, int k) {
  if (frames < 1) throw ArgumentError("clip is empty");
  if (k < 1) throw ArgumentError("max_frames must be >= 1");
  std::vector<int> idx;
  if (frames <= k) {
    for (int i = 0; i < frames; ++i) idx.push_back(i);
  } else {
    for (int i = 0; i < k; ++i) idx.push_back(static_cast<int>(static_cast<long long>(i) * frames / k));
  }
  return idx;
}

namespace {

template <typename F>
StageResult with_retry(const RetryPolicy& policy, const std::string& video_id, const std::string& stage, F&& call) {
  StageResult r;
  int delay = policy.backoff_ms;
  for (int attempt = 1;; ++attempt) {
    r.attempts = attempt;
    try {
      r.text = call();
    } catch (const BackendError& e) {
      if (attempt > policy.retries) throw StageError(video_id, stage, attempt, e.what());
      spdlog::debug("{} {}: attempt {} failed: {}", video_id, stage, attempt, e.what());
      if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      delay *= 2;
      continue;
    } catch (const std::exception& e) {
      throw StageError(video_id, stage, attempt, e.what());
    }
    if (r.text.find_first_not_of(" \t\r\n") == std::string::npos)
      throw StageError(video_id, stage, attempt, ContentError("empty model response").what());
    return r;
  }
}

}  // namespace

StageResult attribute_caption(const Video& clip, ImageCaptioner& client, const RetryPolicy& policy,
                              const std::string& video_id) {
  const int index = median_frame(clip.frames);
  const Image frame = clip.frame(index);
  const json params{{"video_id", video_id}, {"frame_index", index}};
  StageResult r = with_retry(policy, video_id, "attribute", [&] { return client.caption(frame, params); });
  r.provenance = {{"backend", client.backend()}, {"frame_index", index}, {"retries", r.retries()}};
  return r;
}

StageResult action_caption(const Video& clip, VideoCaptioner& client, const RetryPolicy& policy,
                           const std::string& video_id) {
  const auto indices = even_subsample(clip.frames, client.max_frames());
  std::vector<Image> frames;
  for (int i : indices) frames.push_back(clip.frame(i));
  const json params{{"video_id", video_id}, {"frame_indices", indices}};
  StageResult r = with_retry(policy, video_id, "action", [&] { return client.caption(frames, params); });
  r.provenance = {{"backend", client.backend()}, {"frame_indices", indices}, {"retries", r.retries()}};
  return r;
}

StageResult unify_captions(const std::string& attribute, const std::string& action, TextUnifier& client,
                           const RetryPolicy& policy, const std::string& video_id) {
  if (attribute.empty() || action.empty()) throw ArgumentError("unify_captions: both captions must be nonempty");
  const std::string prompt = render_unifier_prompt(attribute, action);
  const json params{{"video_id", video_id}, {"template_version", kUnifierTemplateVersion}};
  StageResult r = with_retry(policy, video_id, "unifier", [&] { return client.complete(prompt, params); });
  r.provenance = {{"backend", client.backend()}, {"template_version", kUnifierTemplateVersion}, {"retries", r.retries()}};
  return r;
}

std::string truncate_tokens(const std::string& text, int max_tokens) {
  std::istringstream in(text);
  std::string word, out;
  for (int n = 0; n < max_tokens && in >> word; ++n) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

std::string iso_timestamp_now() {
  std::time_t t;
  if (const char* e = std::getenv("SOURCE_DATE_EPOCH"); e != nullptr && *e != '\0')
    t = static_cast<std::time_t>(std::strtoll(e, nullptr, 10));
  else
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json CaptionSummary::to_json() const {
  return {{"records", records},
          {"captioned", captioned},
          {"skipped", skipped},
          {"quarantined", quarantined},
          {"client_calls", client_calls}};
}

CaptionSummary caption_corpus(std::vector<DatasetRecord>& records, const CaptionClients& clients,
                              const CaptionOptions& options) {
  if (options.concurrency < 1) throw ConfigError("concurrency must be >= 1");
  if (!clients.attribute || !clients.action || !clients.unifier) throw ConfigError("caption clients are incomplete");
  const auto clock = options.clock ? options.clock : iso_timestamp_now;

  CaptionSummary summary;
  summary.records = static_cast<int>(records.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].captions && records[i].captions->complete() && !records[i].unified_caption.empty())
      ++summary.skipped;
    else
      pending.push_back(i);
  }

  std::mutex mu;  // guards records, summary, and both output files
  std::atomic<std::size_t> next{0};
  std::atomic<int> calls{0};
  std::ofstream quarantine;
  if (!options.quarantine_out.empty() && !pending.empty()) {
    if (options.quarantine_out.has_parent_path()) fs::create_directories(options.quarantine_out.parent_path());
    quarantine.open(options.quarantine_out, std::ios::app);
  }

  auto worker = [&] {
    for (std::size_t p = next++; p < pending.size(); p = next++) {
      const std::size_t i = pending[p];
      DatasetRecord rec;
      {
        std::lock_guard lock(mu);
        rec = records[i];
      }
      try {
        const Video clip = read_clip(options.root / rec.clip_path);
        CaptionTriple triple;
        const StageResult a = attribute_caption(clip, *clients.attribute, clients.attribute_retry, rec.video_id);
        calls += a.attempts;
        const std::string t_attr = clock();
        const StageResult b = action_caption(clip, *clients.action, clients.action_retry, rec.video_id);
        calls += b.attempts;
        const std::string t_act = clock();
        StageResult u;
        try {
          u = unify_captions(a.text, b.text, *clients.unifier, clients.unifier_retry, rec.video_id);
        } catch (const StageError& e) {
          calls += e.attempts();
          throw;
        }
        calls += u.attempts;
        triple.attribute = a.text;
        triple.action = b.text;
        triple.unified = truncate_tokens(u.text, clients.max_tokens);
        triple.provenance = {{"attribute_backend", a.provenance["backend"]},
                             {"action_backend", b.provenance["backend"]},
                             {"unifier_backend", u.provenance["backend"]},
                             {"attribute_frame", a.provenance["frame_index"]},
                             {"action_frames", b.provenance["frame_indices"]},
                             {"template_version", kUnifierTemplateVersion},
                             {"retries", {{"attribute", a.retries()}, {"action", b.retries()}, {"unifier", u.retries()}}},
                             {"timestamps", {{"attribute", t_attr}, {"action", t_act}, {"unified", clock()}}}};
        std::lock_guard lock(mu);
        records[i].captions = triple;
        records[i].unified_caption = triple.unified;
        ++summary.captioned;
        if (!options.manifest_out.empty()) write_manifest(records, options.manifest_out);
      } catch (const std::exception& e) {
        json entry{{"video_id", rec.video_id}, {"stage", "load"}, {"error", e.what()}, {"attempt_count", 0}};
        if (const auto* se = dynamic_cast<const StageError*>(&e)) {
          entry["stage"] = se->stage();
          entry["error"] = se->reason();
          entry["attempt_count"] = se->attempts();
          if (se->stage() != "unifier") calls += se->attempts();
        }
        spdlog::warn("quarantined {}: {}", rec.video_id, entry["error"].get<std::string>());
        std::lock_guard lock(mu);
        ++summary.quarantined;
        if (quarantine.is_open()) quarantine << entry.dump() << "\n" << std::flush;
      }
    }
  };

  const int n_threads = std::min<int>(options.concurrency, static_cast<int>(pending.size()));
  std::vector<std::thread> threads;
  for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  summary.client_calls = calls.load();
  return summary;
}

}  // namespace idkit
