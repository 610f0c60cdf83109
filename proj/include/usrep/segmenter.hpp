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

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "usrep/error.hpp"
#include "usrep/report.hpp"
#include "usrep/text.hpp"

namespace usrep {

/// Canonical lookup-key form of a piece of report text.
inline std::string normalize_text(std::string_view text) {
  return text::Normalize(text);
}

/// ASCII and full-width comma, semicolon and period.
inline std::u32string DefaultDelimiters() { return U",;.，；。"; }

/// A delimiter-free, trimmed, non-empty clinical phrase.
struct Fragment {
  std::string raw;
  std::string normalized;
  Language language = Language::zh;
  std::size_t index = 0;

  friend bool operator==(const Fragment&, const Fragment&) = default;
};

namespace detail {

// An ASCII period between two ASCII digits is a decimal point, not a
// fragment boundary.
inline bool IsBoundary(std::u32string_view s, std::size_t i,
                       std::u32string_view delimiters) {
  const char32_t c = s[i];
  if (delimiters.find(c) == std::u32string_view::npos) return false;
  if (c == U'.' && i > 0 && i + 1 < s.size() && text::IsAsciiDigit(s[i - 1]) &&
      text::IsAsciiDigit(s[i + 1]))
    return false;
  return true;
}

}  // namespace detail

/// Splits `text` on every delimiter occurrence, trimming pieces and
/// dropping empty ones. Indices are assigned in order of appearance.
inline std::vector<Fragment> segment_report(
    std::string_view text, std::u32string_view delimiters = DefaultDelimiters(),
    Language language = Language::zh) {
  if (delimiters.empty()) throw ConfigError("delimiter set is empty");
  const std::u32string cps = text::Decode(text);
  std::vector<Fragment> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    auto piece = text::Trim(std::u32string_view(cps).substr(start, end - start));
    if (piece.empty()) return;
    Fragment f;
    f.raw = text::Encode(piece);
    f.normalized = normalize_text(f.raw);
    f.language = language;
    f.index = out.size();
    out.push_back(std::move(f));
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (detail::IsBoundary(cps, i, delimiters)) {
      flush(i);
      start = i + 1;
    }
  }
  flush(cps.size());
  return out;
}

inline std::vector<Fragment> segment_report(const Report& report,
                                            std::u32string_view delimiters =
                                                DefaultDelimiters()) {
  return segment_report(report.text, delimiters, report.language);
}

/// Fragment-level comparison of a predicted report against its reference.
struct FragmentDiff {
  std::vector<std::pair<Fragment, Fragment>> matched;  // (pred, ref)
  std::vector<Fragment> extra;                         // pred only
  std::vector<Fragment> missing;                       // ref only
};

/// Exact matching on normalized text with multiplicity: each predicted
/// fragment, in order, takes the first unconsumed equal reference fragment.
inline FragmentDiff fragment_diff(const Report& pred, const Report& ref,
                                  std::u32string_view delimiters =
                                      DefaultDelimiters()) {
  if (pred.language != ref.language)
    throw IncomparableError("cannot diff " + std::string(ToString(pred.language)) +
                            " prediction against " +
                            std::string(ToString(ref.language)) + " reference");
  auto pred_frags = segment_report(pred, delimiters);
  auto ref_frags = segment_report(ref, delimiters);
  std::vector<bool> consumed(ref_frags.size(), false);
  FragmentDiff diff;
  for (auto& p : pred_frags) {
    bool hit = false;
    for (std::size_t j = 0; j < ref_frags.size(); ++j) {
      if (!consumed[j] && ref_frags[j].normalized == p.normalized) {
        consumed[j] = true;
        diff.matched.emplace_back(p, ref_frags[j]);
        hit = true;
        break;
      }
    }
    if (!hit) diff.extra.push_back(std::move(p));
  }
  for (std::size_t j = 0; j < ref_frags.size(); ++j)
    if (!consumed[j]) diff.missing.push_back(std::move(ref_frags[j]));
  return diff;
}

}  // namespace usrep
