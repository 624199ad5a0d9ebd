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

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "idkit/core/image.hpp"
#include "idkit/net/endpoint.hpp"

namespace idkit {

class ImageCaptioner {
 public:
  virtual ~ImageCaptioner() = default;
  virtual std::string backend() const = 0;
  virtual std::string caption(const Image& image, const nlohmann::json& params) = 0;
};

class VideoCaptioner {
 public:
  virtual ~VideoCaptioner() = default;
  virtual std::string backend() const = 0;
  virtual int max_frames() const = 0;
  virtual std::string caption(const std::vector<Image>& frames, const nlohmann::json& params) = 0;
};

class TextUnifier {
 public:
  virtual ~TextUnifier() = default;
  virtual std::string backend() const = 0;
  virtual std::string complete(const std::string& prompt, const nlohmann::json& params) = 0;
};

// Shared behavior of the deterministic local mocks, configured from the
// query string of a mock:// URL:
//   fail=N        the first N calls raise a transport error
//   poison=a,b    calls whose params.video_id is listed always fail
//   delay_ms=N    sleep inside the call (to exercise concurrency)
//   auth=1        require the endpoint's auth_env variable to be set
class MockBehavior {
 public:
  explicit MockBehavior(const Endpoint& endpoint);
  // Counts the call, applies failure rules, then holds the in-flight gauge
  // for the configured delay. Returns the mode (the URL host).
  class Call {
   public:
    Call(MockBehavior& owner, const nlohmann::json& params);
    ~Call();
    Call(const Call&) = delete;
    Call& operator=(const Call&) = delete;

   private:
    MockBehavior& owner_;
  };

  const std::string& mode() const { return mode_; }
  int calls() const { return calls_.load(); }
  int max_in_flight() const { return max_in_flight_.load(); }
  const std::string& url() const { return url_; }

 private:
  std::string url_;
  std::string mode_;
  std::string auth_env_;
  bool require_auth_ = false;
  int fail_first_ = 0;
  int delay_ms_ = 0;
  std::set<std::string> poison_;
  std::atomic<int> calls_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
};

// mock://echo     -> "frame:{frame_index}"
// mock://describe -> colour of the brightest region
// mock://empty    -> ""
class MockImageCaptioner : public ImageCaptioner {
 public:
  explicit MockImageCaptioner(const Endpoint& endpoint) : behavior_(endpoint) {}
  std::string backend() const override { return behavior_.url(); }
  std::string caption(const Image& image, const nlohmann::json& params) override;
  MockBehavior& behavior() { return behavior_; }

 private:
  MockBehavior behavior_;
};

// mock://echo     -> "frames:{n}"
// mock://describe -> direction the brightest region moves
class MockVideoCaptioner : public VideoCaptioner {
 public:
  explicit MockVideoCaptioner(const Endpoint& endpoint) : behavior_(endpoint), max_frames_(endpoint.max_frames) {}
  std::string backend() const override { return behavior_.url(); }
  int max_frames() const override { return max_frames_; }
  std::string caption(const std::vector<Image>& frames, const nlohmann::json& params) override;
  MockBehavior& behavior() { return behavior_; }

 private:
  MockBehavior behavior_;
  int max_frames_;
};

// mock://concat -> "{attribute} | {action}"
// mock://merge  -> "{attribute}, {action}"
// mock://empty  -> ""
class MockTextUnifier : public TextUnifier {
 public:
  explicit MockTextUnifier(const Endpoint& endpoint) : behavior_(endpoint) {}
  std::string backend() const override { return behavior_.url(); }
  std::string complete(const std::string& prompt, const nlohmann::json& params) override;
  MockBehavior& behavior() { return behavior_; }

 private:
  MockBehavior behavior_;
};

// JSON-over-HTTP clients. Requests are {model, inputs, params}; responses
// must carry {"text": ...}.
class HttpImageCaptioner : public ImageCaptioner {
 public:
  explicit HttpImageCaptioner(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string backend() const override { return endpoint_.model_name + "@" + endpoint_.base_url; }
  std::string caption(const Image& image, const nlohmann::json& params) override;

 private:
  Endpoint endpoint_;
};

class HttpVideoCaptioner : public VideoCaptioner {
 public:
  explicit HttpVideoCaptioner(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string backend() const override { return endpoint_.model_name + "@" + endpoint_.base_url; }
  int max_frames() const override { return endpoint_.max_frames; }
  std::string caption(const std::vector<Image>& frames, const nlohmann::json& params) override;

 private:
  Endpoint endpoint_;
};

class HttpTextUnifier : public TextUnifier {
 public:
  explicit HttpTextUnifier(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string backend() const override { return endpoint_.model_name + "@" + endpoint_.base_url; }
  std::string complete(const std::string& prompt, const nlohmann::json& params) override;

 private:
  Endpoint endpoint_;
};

// Endpoint config file: {"attribute": Endpoint, "action": Endpoint,
// "unifier": Endpoint, "max_tokens": int}.
struct CaptionEndpoints {
  Endpoint attribute;
  Endpoint action;
  Endpoint unifier;
  int max_tokens = 77;

  static CaptionEndpoints from_json(const nlohmann::json& j);
  static CaptionEndpoints load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct CaptionClients {
  std::shared_ptr<ImageCaptioner> attribute;
  std::shared_ptr<VideoCaptioner> action;
  std::shared_ptr<TextUnifier> unifier;
  RetryPolicy attribute_retry;
  RetryPolicy action_retry;
  RetryPolicy unifier_retry;
  int max_tokens = 77;
};

// mock:// URLs get the local mocks, anything else the HTTP clients.
CaptionClients make_caption_clients(const CaptionEndpoints& endpoints);

}  // namespace idkit
