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

#include <map>
#include <string>

namespace idkit {

inline constexpr const char* kUnifierTemplate =
    "Merge the following two descriptions of the same video into one fluent caption that keeps all person "
    "attributes and the action. Attributes: {attribute} Action: {action}";
inline constexpr const char* kUnifierTemplateVersion = "unify-v1";

// Single-pass substitution of {name} placeholders. Literal braces in the
// template are written as {{ and }}; braces in values are escaped the same
// way, so a value can never introduce a placeholder.
std::string render_template(const std::string& tmpl, const std::map<std::string, std::string>& values);

// Inverse of render_template for templates whose placeholders are separated
// by literal text. Raises ArgumentError when the text does not match or a
// separator occurs ambiguously.
std::map<std::string, std::string> parse_template(const std::string& tmpl, const std::string& rendered);

std::string render_unifier_prompt(const std::string& attribute, const std::string& action);

struct UnifierInputs {
  std::string attribute;
  std::string action;
};
UnifierInputs parse_unifier_prompt(const std::string& prompt);

std::string escape_braces(const std::string& s);
std::string unescape_braces(const std::string& s);

}  // namespace idkit
