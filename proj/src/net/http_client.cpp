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

#include "idkit/net/http_client.hpp"

#include <cstdlib>

#include <httplib.h>

#include "idkit/core/error.hpp"

namespace idkit {

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  return httplib::detail::base64_encode(std::string(bytes.begin(), bytes.end()));
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  static const std::string kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::vector<unsigned char> out;
  unsigned acc = 0;
  int bits = 0;
  for (char ch : text) {
    if (ch == '=') break;
    const auto pos = kAlphabet.find(ch);
    if (pos == std::string::npos) throw ArgumentError("invalid base64 character");
    acc = (acc << 6) | static_cast<unsigned>(pos);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& inputs, const nlohmann::json& params) {
  const ParsedUrl url = parse_url(endpoint.base_url);
  if (url.scheme != "http") throw BackendError(endpoint.base_url, "only http:// endpoints are supported");

  httplib::Client client(url.host, url.port);
  const auto whole = static_cast<time_t>(endpoint.timeout_s);
  const auto micros = static_cast<time_t>((endpoint.timeout_s - static_cast<double>(whole)) * 1e6);
  client.set_connection_timeout(whole, micros);
  client.set_read_timeout(whole, micros);
  client.set_write_timeout(whole, micros);

  httplib::Headers headers;
  if (!endpoint.auth_env.empty()) {
    const char* token = std::getenv(endpoint.auth_env.c_str());
    if (token == nullptr || *token == '\0')
      throw BackendError(endpoint.base_url, "environment variable " + endpoint.auth_env + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  const nlohmann::json body{{"model", endpoint.model_name}, {"inputs", inputs}, {"params", params}};
  std::string target = url.path;
  if (!url.query.empty()) target += "?" + url.query;
  auto res = client.Post(target, headers, body.dump(), "application/json");
  if (!res) throw BackendError(endpoint.base_url, "request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw BackendError(endpoint.base_url, "HTTP status " + std::to_string(res->status));
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw BackendError(endpoint.base_url, "response is not JSON");
  }
}

}  // namespace idkit
