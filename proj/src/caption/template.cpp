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

#include "idkit/caption/template.hpp"

#include <variant>
#include <vector>

#include "idkit/core/error.hpp"

namespace idkit {

namespace {

struct Placeholder {
  std::string name;
};
using Piece = std::variant<std::string, Placeholder>;

// Literal pieces are kept in rendered (escaped) form.
std::vector<Piece> split_template(const std::string& tmpl) {
  std::vector<Piece> out;
  std::string lit;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    const char c = tmpl[i];
    if ((c == '{' || c == '}') && i + 1 < tmpl.size() && tmpl[i + 1] == c) {
      lit += c;
      lit += c;
      ++i;
    } else if (c == '{') {
      const auto close = tmpl.find('}', i);
      if (close == std::string::npos) throw ArgumentError("template: unterminated placeholder");
      if (!lit.empty()) out.emplace_back(std::move(lit)), lit.clear();
      out.emplace_back(Placeholder{tmpl.substr(i + 1, close - i - 1)});
      i = close;
    } else if (c == '}') {
      throw ArgumentError("template: unmatched '}'");
    } else {
      lit += c;
    }
  }
  if (!lit.empty()) out.emplace_back(std::move(lit));
  return out;
}

}  // namespace

std::string escape_braces(const std::string& s) {
  std::string out;
  for (char c : s) {
    out += c;
    if (c == '{' || c == '}') out += c;
  }
  return out;
}

std::string unescape_braces(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '{' || c == '}') {
      if (i + 1 >= s.size() || s[i + 1] != c) throw ArgumentError("unescaped brace in rendered value");
      ++i;
    }
    out += c;
  }
  return out;
}

std::string render_template(const std::string& tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  for (const auto& piece : split_template(tmpl)) {
    if (const auto* lit = std::get_if<std::string>(&piece)) {
      out += *lit;
    } else {
      const auto& name = std::get<Placeholder>(piece).name;
      auto it = values.find(name);
      if (it == values.end()) throw ArgumentError("template: no value for {" + name + "}");
      out += escape_braces(it->second);
    }
  }
  return out;
}

std::map<std::string, std::string> parse_template(const std::string& tmpl, const std::string& rendered) {
  const auto pieces = split_template(tmpl);
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (const auto* lit = std::get_if<std::string>(&pieces[i])) {
      if (rendered.compare(pos, lit->size(), *lit) != 0) throw ArgumentError("rendered text does not match template");
      pos += lit->size();
      continue;
    }
    const auto& name = std::get<Placeholder>(pieces[i]).name;
    std::size_t end = rendered.size();
    if (i + 1 < pieces.size()) {
      const auto* next = std::get_if<std::string>(&pieces[i + 1]);
      if (!next) throw ArgumentError("template: adjacent placeholders cannot be parsed");
      end = rendered.find(*next, pos);
      if (end == std::string::npos) throw ArgumentError("rendered text does not match template");
      if (rendered.find(*next, end + 1) != std::string::npos)
        throw ArgumentError("rendered text is ambiguous: separator repeats");
    }
    out[name] = unescape_braces(rendered.substr(pos, end - pos));
    pos = end;
  }
  if (pos != rendered.size()) throw ArgumentError("trailing text after template");
  return out;
}

std::string render_unifier_prompt(const std::string& attribute, const std::string& action) {
  return render_template(kUnifierTemplate, {{"attribute", attribute}, {"action", action}});
}

UnifierInputs parse_unifier_prompt(const std::string& prompt) {
  auto v = parse_template(kUnifierTemplate, prompt);
  return {v.at("attribute"), v.at("action")};
}

}  // namespace idkit
