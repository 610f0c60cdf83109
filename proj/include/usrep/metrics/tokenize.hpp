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

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "usrep/report.hpp"
#include "usrep/text.hpp"

namespace usrep::metrics {

using Tokens = std::vector<std::string>;

/// A hypothesis/reference token pair (single reference per item).
struct TokenizedPair {
  Tokens hyp;
  Tokens ref;
  Language language = Language::zh;
};

enum class Tokenization {
  builtin,     // language-aware rule below
  whitespace,  // input is already tokenized; split on whitespace only
};

/// en: NFKC, lowercase, split on non-alphanumeric runs.
/// zh: NFKC; every Han character is a token; ASCII alphanumeric runs
/// (a '.' between two digits included, so "1.5cm" stays whole) are one
/// token; other letters/digits are single-character tokens; everything
/// else is dropped.
inline Tokens tokenize_for_metrics(std::string_view input, Language language,
                                   Tokenization mode = Tokenization::builtin) {
  const std::u32string cps = text::Decode(text::Nfkc(input));
  Tokens out;
  std::u32string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(text::Encode(cur));
    cur.clear();
  };
  if (mode == Tokenization::whitespace) {
    for (char32_t c : cps) {
      if (text::IsSpace(c)) flush();
      else cur.push_back(c);
    }
    flush();
    return out;
  }
  if (language == Language::en) {
    for (char32_t c : cps) {
      if (text::IsAlnum(c)) cur.push_back(text::ToLower(c));
      else flush();
    }
    flush();
    return out;
  }
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i];
    if (text::IsAsciiAlnum(c)) {
      cur.push_back(c);
      continue;
    }
    if (c == U'.' && !cur.empty() && text::IsAsciiDigit(cur.back()) && i + 1 < cps.size() &&
        text::IsAsciiDigit(cps[i + 1])) {
      cur.push_back(c);
      continue;
    }
    flush();
    if (text::IsHan(c) || text::IsAlnum(c)) out.push_back(text::Encode(std::u32string(1, c)));
  }
  flush();
  return out;
}

/// n-gram multiset keyed by the tokens joined with U+001F.
using NGramCounts = std::unordered_map<std::string, int>;

inline NGramCounts CountNGrams(const Tokens& tokens, std::size_t n) {
  NGramCounts counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      key.push_back('\x1f');
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace usrep::metrics
