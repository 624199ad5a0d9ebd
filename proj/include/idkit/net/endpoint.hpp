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

#include <string>

#include <json.hpp>

namespace idkit {

struct RetryPolicy {
  int retries = 2;        // additional attempts after the first
  int backoff_ms = 200;   // doubled after each failure
};

// A remote model service. `auth_env` names the environment variable holding
// the bearer token; the token itself is never stored or serialized.
struct Endpoint {
  std::string base_url;
  std::string model_name;
  double timeout_s = 30.0;
  RetryPolicy retry;
  std::string auth_env;
  int max_frames = 8;  // video captioners only

  void validate() const;
  bool is_mock() const { return base_url.rfind("mock://", 0) == 0; }
  nlohmann::json to_json() const;
  static Endpoint from_json(const nlohmann::json& j);
};

struct ParsedUrl {
  std::string scheme;
  std::string host;
  int port = 80;
  std::string path = "/";
  std::string query;
};

ParsedUrl parse_url(const std::string& url);

}  // namespace idkit
