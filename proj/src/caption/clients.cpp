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

#include "idkit/caption/clients.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "idkit/caption/template.hpp"
#include "idkit/core/error.hpp"
#include "idkit/core/fileio.hpp"
#include "idkit/io/image_io.hpp"
#include "idkit/net/http_client.hpp"

namespace idkit {

namespace {

std::map<std::string, std::string> parse_query(const std::string& q) {
  std::map<std::string, std::string> out;
  std::stringstream ss(q);
  std::string item;
  while (std::getline(ss, item, '&')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      out[item] = "1";
    else
      out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

struct Bright {
  double r = 0, g = 0, b = 0, cx = 0, cy = 0;
  int n = 0;
};

Bright bright_region(const Image& img) {
  Bright s;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const float r = img.at(y, x, 0), g = img.at(y, x, 1), b = img.at(y, x, 2);
      if (std::max({r, g, b}) <= 0.7f) continue;
      s.r += r, s.g += g, s.b += b, s.cx += x, s.cy += y;
      ++s.n;
    }
  if (s.n > 0) {
    s.r /= s.n, s.g /= s.n, s.b /= s.n, s.cx /= s.n, s.cy /= s.n;
  }
  return s;
}

std::string colour_name(double r, double g, double b) {
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  if (mx - mn < 0.1) return "pale";
  double h;
  if (mx == r)
    h = std::fmod((g - b) / (mx - mn), 6.0);
  else if (mx == g)
    h = (b - r) / (mx - mn) + 2.0;
  else
    h = (r - g) / (mx - mn) + 4.0;
  h *= 60.0;
  if (h < 0) h += 360.0;
  static const std::pair<double, const char*> kNames[] = {{20, "red"},     {45, "orange"}, {70, "yellow"},
                                                          {160, "green"},  {200, "cyan"},  {255, "blue"},
                                                          {290, "purple"}, {335, "pink"},  {360, "red"}};
  for (const auto& [limit, name] : kNames)
    if (h < limit) return name;
  return "red";
}

std::string response_text(const json& res, const std::string& source) {
  if (!res.contains("text") || !res["text"].is_string()) throw BackendError(source, "response has no 'text' field");
  return res["text"].get<std::string>();
}

}  // namespace

MockBehavior::MockBehavior(const Endpoint& endpoint) : url_(endpoint.base_url), auth_env_(endpoint.auth_env) {
  const ParsedUrl u = parse_url(endpoint.base_url);
  mode_ = u.host;
  const auto q = parse_query(u.query);
  if (auto it = q.find("fail"); it != q.end()) fail_first_ = std::stoi(it->second);
  if (auto it = q.find("delay_ms"); it != q.end()) delay_ms_ = std::stoi(it->second);
  if (auto it = q.find("auth"); it != q.end()) require_auth_ = it->second == "1";
  if (auto it = q.find("poison"); it != q.end()) {
    std::stringstream ss(it->second);
    std::string id;
    while (std::getline(ss, id, ',')) poison_.insert(id);
  }
}

MockBehavior::Call::Call(MockBehavior& owner, const json& params) : owner_(owner) {
  const int n = ++owner_.calls_;
  const int now = ++owner_.in_flight_;
  int prev = owner_.max_in_flight_.load();
  while (now > prev && !owner_.max_in_flight_.compare_exchange_weak(prev, now)) {
  }
  if (owner_.delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(owner_.delay_ms_));
  try {
    if (owner_.require_auth_) {
      const char* token = owner_.auth_env_.empty() ? nullptr : std::getenv(owner_.auth_env_.c_str());
      if (token == nullptr || *token == '\0') throw BackendError(owner_.url_, "HTTP status 401");
    }
    if (n <= owner_.fail_first_) throw BackendError(owner_.url_, "HTTP status 503");
    const std::string vid = params.value("video_id", std::string());
    if (owner_.poison_.count(vid)) throw BackendError(owner_.url_, "HTTP status 500 for " + vid);
  } catch (...) {
    --owner_.in_flight_;
    throw;
  }
}

MockBehavior::Call::~Call() { --owner_.in_flight_; }

std::string MockImageCaptioner::caption(const Image& image, const json& params) {
  MockBehavior::Call call(behavior_, params);
  const std::string& mode = behavior_.mode();
  if (mode == "echo") return "frame:" + std::to_string(params.value("frame_index", -1));
  if (mode == "empty") return "";
  if (mode == "describe") {
    const Bright s = bright_region(image);
    if (s.n == 0) return "an empty scene";
    return "a person with a " + colour_name(s.r, s.g, s.b) + " face";
  }
  throw BackendError(behavior_.url(), "unknown mock mode '" + mode + "'");
}

std::string MockVideoCaptioner::caption(const std::vector<Image>& frames, const json& params) {
  MockBehavior::Call call(behavior_, params);
  const std::string& mode = behavior_.mode();
  if (mode == "echo") return "frames:" + std::to_string(frames.size());
  if (mode == "empty") return "";
  if (mode == "describe") {
    if (frames.empty()) return "nothing happens";
    const Bright a = bright_region(frames.front()), b = bright_region(frames.back());
    if (a.n == 0 || b.n == 0) return "nobody in view";
    const double dx = b.cx - a.cx, dy = b.cy - a.cy;
    const double tol = 0.02 * frames.front().width;
    if (std::abs(dx) < tol && std::abs(dy) < tol) return "staying still";
    if (std::abs(dx) >= std::abs(dy)) return dx > 0 ? "moving right" : "moving left";
    return dy > 0 ? "moving down" : "moving up";
  }
  throw BackendError(behavior_.url(), "unknown mock mode '" + mode + "'");
}

std::string MockTextUnifier::complete(const std::string& prompt, const json& params) {
  MockBehavior::Call call(behavior_, params);
  const std::string& mode = behavior_.mode();
  if (mode == "empty") return "";
  const UnifierInputs in = parse_unifier_prompt(prompt);
  if (mode == "concat") return in.attribute + " | " + in.action;
  if (mode == "merge") return in.attribute + ", " + in.action;
  throw BackendError(behavior_.url(), "unknown mock mode '" + mode + "'");
}

std::string HttpImageCaptioner::caption(const Image& image, const json& params) {
  return response_text(post_json(endpoint_, {{"image", base64_encode(encode_png(image))}}, params), backend());
}

std::string HttpVideoCaptioner::caption(const std::vector<Image>& frames, const json& params) {
  json list = json::array();
  for (const auto& f : frames) list.push_back(base64_encode(encode_png(f)));
  return response_text(post_json(endpoint_, {{"frames", list}}, params), backend());
}

std::string HttpTextUnifier::complete(const std::string& prompt, const json& params) {
  return response_text(post_json(endpoint_, {{"prompt", prompt}}, params), backend());
}

CaptionEndpoints CaptionEndpoints::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("endpoints: must be a JSON object");
  for (const char* key : {"attribute", "action", "unifier"})
    if (!j.contains(key)) throw ConfigError(std::string("endpoints: missing '") + key + "'");
  CaptionEndpoints e;
  e.attribute = Endpoint::from_json(j["attribute"]);
  e.action = Endpoint::from_json(j["action"]);
  e.unifier = Endpoint::from_json(j["unifier"]);
  e.max_tokens = j.value("max_tokens", 77);
  if (e.max_tokens < 1) throw ConfigError("endpoints: max_tokens must be >= 1");
  return e;
}

CaptionEndpoints CaptionEndpoints::load(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("endpoints file not found: " + path.string());
  json j;
  try {
    j = read_json(path);
  } catch (const std::exception& e) {
    throw ConfigError("endpoints file " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

json CaptionEndpoints::to_json() const {
  return {{"attribute", attribute.to_json()},
          {"action", action.to_json()},
          {"unifier", unifier.to_json()},
          {"max_tokens", max_tokens}};
}

CaptionClients make_caption_clients(const CaptionEndpoints& e) {
  CaptionClients c;
  if (e.attribute.is_mock())
    c.attribute = std::make_shared<MockImageCaptioner>(e.attribute);
  else
    c.attribute = std::make_shared<HttpImageCaptioner>(e.attribute);
  if (e.action.is_mock())
    c.action = std::make_shared<MockVideoCaptioner>(e.action);
  else
    c.action = std::make_shared<HttpVideoCaptioner>(e.action);
  if (e.unifier.is_mock())
    c.unifier = std::make_shared<MockTextUnifier>(e.unifier);
  else
    c.unifier = std::make_shared<HttpTextUnifier>(e.unifier);
  c.attribute_retry = e.attribute.retry;
  c.action_retry = e.action.retry;
  c.unifier_retry = e.unifier.retry;
  c.max_tokens = e.max_tokens;
  return c;
}

}  // namespace idkit
