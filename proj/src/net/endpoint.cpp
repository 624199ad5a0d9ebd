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

#include "idkit/net/endpoint.hpp"

#include <regex>

#include "idkit/core/error.hpp"

namespace idkit {

void Endpoint::validate() const {
  if (base_url.empty()) throw ConfigError("endpoint: base_url is empty");
  if (!(timeout_s > 0)) throw ConfigError("endpoint: timeout must be positive");
  if (retry.retries < 0) throw ConfigError("endpoint: retries must be >= 0");
  if (retry.backoff_ms < 0) throw ConfigError("endpoint: backoff_ms must be >= 0");
  if (max_frames < 1) throw ConfigError("endpoint: max_frames must be >= 1");
  if (!is_mock()) parse_url(base_url);
}

nlohmann::json Endpoint::to_json() const {
  return {{"base_url", base_url},
          {"model_name", model_name},
          {"timeout", timeout_s},
          {"retry", {{"retries", retry.retries}, {"backoff_ms", retry.backoff_ms}}},
          {"auth_env", auth_env},
          {"max_frames", max_frames}};
}

Endpoint Endpoint::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("endpoint must be a JSON object");
  Endpoint e;
  try {
    e.base_url = j.at("base_url").get<std::string>();
    e.model_name = j.value("model_name", std::string());
    e.timeout_s = j.value("timeout", 30.0);
    if (j.contains("retry")) {
      e.retry.retries = j["retry"].value("retries", 2);
      e.retry.backoff_ms = j["retry"].value("backoff_ms", 200);
    }
    e.auth_env = j.value("auth_env", std::string());
    e.max_frames = j.value("max_frames", 8);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("endpoint: ") + ex.what());
  }
  if (j.contains("token") || j.contains("api_key"))
    throw ConfigError("endpoint: secrets must come from the environment (use auth_env)");
  e.validate();
  return e;
}

ParsedUrl parse_url(const std::string& url) {
  static const std::regex re(R"(^([a-z][a-z0-9+.-]*)://([^/:?#]+)(?::(\d+))?([^?#]*)(?:\?([^#]*))?$)",
                             std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw ConfigError("malformed URL: " + url);
  ParsedUrl u;
  u.scheme = m[1].str();
  u.host = m[2].str();
  u.port = m[3].matched ? std::stoi(m[3].str()) : (u.scheme == "https" ? 443 : 80);
  u.path = m[4].str().empty() ? "/" : m[4].str();
  u.query = m[5].str();
  return u;
}

}  // namespace idkit
