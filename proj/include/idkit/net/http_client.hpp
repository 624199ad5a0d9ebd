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
#include <vector>

#include <json.hpp>

#include "idkit/net/endpoint.hpp"

namespace idkit {

std::string base64_encode(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> base64_decode(const std::string& text);

// POSTs {model, inputs, params} to the endpoint and returns the decoded JSON
// response. Transport failures and non-2xx statuses raise BackendError.
nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& inputs, const nlohmann::json& params);

}  // namespace idkit
