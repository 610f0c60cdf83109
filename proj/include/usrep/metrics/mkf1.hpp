// Copyright (c) 2026 The usrep Authors
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

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "usrep/error.hpp"
#include "usrep/text.hpp"

namespace usrep::metrics {

/// Site name -> organ-specific keywords.
using KeywordList = std::map<std::string, std::vector<std::string>>;

/// Keyword file: JSON object mapping site -> array of strings.
inline KeywordList KeywordListFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("keyword list must be a JSON object");
  KeywordList out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it->is_array()) throw ConfigError("keywords for '" + it.key() + "' must be an array");
    auto& list = out[it.key()];
    for (const auto& k : *it) {
      if (!k.is_string()) throw ConfigError("keyword for '" + it.key() + "' is not a string");
      std::string norm = text::Normalize(k.get<std::string>());
      if (norm.empty()) throw ConfigError("empty keyword for site '" + it.key() + "'");
      list.push_back(std::move(norm));
    }
  }
  return out;
}

struct KeywordPair {
  std::string hyp;
  std::string ref;
  std::string site;
};

struct Mkf1Result {
  double macro = 0.0;
  double micro = 0.0;
  std::vector<double> per_pair;
  std::size_t tp = 0, fp = 0, fn = 0;
};

namespace detail {

inline std::string MatchForm(std::string_view s) {
  return text::FoldCase(text::Normalize(s));
}

inline std::set<std::string> FoundKeywords(const std::string& folded_text,
                                           const std::vector<std::string>& keywords) {
  std::set<std::string> found;
  for (const auto& k : keywords) {
    std::string key = MatchForm(k);
    if (folded_text.find(key) != std::string::npos) found.insert(std::move(key));
  }
  return found;
}

}  // namespace detail

/// Keyword F1 per pair and pooled. Keywords match as case-insensitive
/// substrings of the normalized text. When neither side mentions any
/// keyword the pair scores 1.
inline Mkf1Result mkf1(std::span<const KeywordPair> pairs, const KeywordList& keywords) {
  Mkf1Result out;
  for (const auto& p : pairs) {
    auto it = keywords.find(p.site);
    if (it == keywords.end()) throw InvalidArgument("no keywords for site '" + p.site + "'");
    const auto h = detail::FoundKeywords(detail::MatchForm(p.hyp), it->second);
    const auto r = detail::FoundKeywords(detail::MatchForm(p.ref), it->second);
    std::size_t common = 0;
    for (const auto& k : h) common += r.count(k);
    out.tp += common;
    out.fp += h.size() - common;
    out.fn += r.size() - common;
    double f1;
    if (h.empty() && r.empty()) {
      f1 = 1.0;
    } else {
      const double precision = h.empty() ? 0.0 : double(common) / double(h.size());
      const double recall = r.empty() ? 0.0 : double(common) / double(r.size());
      f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    }
    out.per_pair.push_back(f1);
    out.macro += f1;
  }
  if (!pairs.empty()) out.macro /= static_cast<double>(pairs.size());
  const std::size_t denom = 2 * out.tp + out.fp + out.fn;
  out.micro = denom == 0 ? 1.0 : 2.0 * double(out.tp) / double(denom);
  return out;
}

}  // namespace usrep::metrics
