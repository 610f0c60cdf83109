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
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "usrep/error.hpp"
#include "usrep/report.hpp"
#include "usrep/segmenter.hpp"
#include "usrep/text.hpp"

namespace usrep {

enum class ReviewStatus { pending, approved, edited, rejected };

inline std::string_view ToString(ReviewStatus s) {
  switch (s) {
    case ReviewStatus::pending: return "pending";
    case ReviewStatus::approved: return "approved";
    case ReviewStatus::edited: return "edited";
    case ReviewStatus::rejected: return "rejected";
  }
  return "pending";
}

inline std::optional<ReviewStatus> ParseReviewStatus(std::string_view s) {
  if (s == "pending") return ReviewStatus::pending;
  if (s == "approved") return ReviewStatus::approved;
  if (s == "edited") return ReviewStatus::edited;
  if (s == "rejected") return ReviewStatus::rejected;
  return std::nullopt;
}

/// Approved and edited entries are usable for translation.
inline bool IsResolved(ReviewStatus s) {
  return s == ReviewStatus::approved || s == ReviewStatus::edited;
}

struct FragmentEntry {
  std::string source;  // normalized zh fragment, unique key
  std::string target;
  ReviewStatus status = ReviewStatus::pending;
  std::uint64_t occurrences = 0;
  std::optional<std::string> reviewer;
  std::string updated_at;  // ISO-8601 UTC; empty until first review

  friend bool operator==(const FragmentEntry&, const FragmentEntry&) = default;
};

/// Bilingual fragment translation memory keyed by normalized source.
/// Iteration order is descending occurrences, then source bytes.
class FragmentTable {
 public:
  FragmentTable() = default;

  /// Inserts a new entry; a duplicate source is an error.
  void Add(FragmentEntry entry) {
    if (index_.count(entry.source))
      throw InvalidArgument("duplicate table source '" + entry.source + "'");
    index_.emplace(entry.source, entries_.size());
    entries_.push_back(std::move(entry));
    sorted_ = false;
  }

  const FragmentEntry* Find(std::string_view source) const {
    auto it = index_.find(std::string(source));
    return it == index_.end() ? nullptr : &entries_[it->second];
  }
  FragmentEntry* Find(std::string_view source) {
    auto it = index_.find(std::string(source));
    return it == index_.end() ? nullptr : &entries_[it->second];
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const std::vector<FragmentEntry>& entries() const {
    SortIfNeeded();
    return entries_;
  }
  auto begin() const { return entries().begin(); }
  auto end() const { return entries().end(); }

 private:
  void SortIfNeeded() const {
    if (sorted_) return;
    std::sort(entries_.begin(), entries_.end(),
              [](const FragmentEntry& a, const FragmentEntry& b) {
                if (a.occurrences != b.occurrences)
                  return a.occurrences > b.occurrences;
                return a.source < b.source;
              });
    index_.clear();
    for (std::size_t i = 0; i < entries_.size(); ++i)
      index_.emplace(entries_[i].source, i);
    sorted_ = true;
  }

  mutable std::vector<FragmentEntry> entries_;
  mutable std::unordered_map<std::string, std::size_t> index_;
  mutable bool sorted_ = true;
};

// ---------------------------------------------------------------------------
// Protected terms

/// A regex matched case-sensitively against a source fragment; every match
/// must survive verbatim into the target.
class ProtectedTermRule {
 public:
  static ProtectedTermRule Compile(std::string pattern, std::string description = {}) {
    ProtectedTermRule r;
    try {
      r.regex_ = std::regex(pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw ConfigError("invalid protected-term pattern '" + pattern + "': " + e.what());
    }
    r.pattern_ = std::move(pattern);
    r.description_ = std::move(description);
    return r;
  }

  const std::string& pattern() const noexcept { return pattern_; }
  const std::string& description() const noexcept { return description_; }
  const std::regex& regex() const noexcept { return regex_; }

 private:
  std::string pattern_;
  std::string description_;
  std::regex regex_;
};

inline std::vector<ProtectedTermRule> DefaultProtectedTerms() {
  return {ProtectedTermRule::Compile("CFDI", "color flow Doppler imaging")};
}

/// Rules file: one pattern per line, optional TAB + description.
/// Blank lines and lines starting with '#' are skipped.
inline std::vector<ProtectedTermRule> ReadProtectedTerms(std::istream& in) {
  std::vector<ProtectedTermRule> rules;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::string pattern = line, description;
    if (auto tab = line.find('\t'); tab != std::string::npos) {
      pattern = line.substr(0, tab);
      description = line.substr(tab + 1);
    }
    try {
      rules.push_back(ProtectedTermRule::Compile(pattern, description));
    } catch (const ConfigError& e) {
      throw ConfigError("rules line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rules;
}

/// Defaults plus user rules, deduplicated by pattern.
inline std::vector<ProtectedTermRule> MergeRules(std::vector<ProtectedTermRule> base,
                                                 const std::vector<ProtectedTermRule>& extra) {
  for (const auto& r : extra) {
    bool dup = std::any_of(base.begin(), base.end(), [&](const ProtectedTermRule& b) {
      return b.pattern() == r.pattern();
    });
    if (!dup) base.push_back(r);
  }
  return base;
}

struct TermViolation {
  std::string source;
  std::string pattern;
  std::string term;  // matched substring missing from the target

  friend bool operator==(const TermViolation&, const TermViolation&) = default;
};

inline std::vector<TermViolation> check_protected_terms(
    const FragmentEntry& entry, const std::vector<ProtectedTermRule>& rules) {
  std::vector<TermViolation> out;
  const std::string target = normalize_text(entry.target);
  for (const auto& rule : rules) {
    std::set<std::string> seen;
    auto it = std::sregex_iterator(entry.source.begin(), entry.source.end(), rule.regex());
    for (; it != std::sregex_iterator(); ++it) {
      if (it->length() == 0) continue;
      std::string term = normalize_text(it->str());
      if (term.empty() || !seen.insert(term).second) continue;
      if (target.find(term) == std::string::npos)
        out.push_back({entry.source, rule.pattern(), std::move(term)});
    }
  }
  return out;
}

/// Raised when a write would persist an approved/edited entry that fails
/// the protected-term check.
class ProtectedTermError : public Error {
 public:
  explicit ProtectedTermError(std::vector<TermViolation> v)
      : Error(Describe(v)), violations_(std::move(v)) {}
  const std::vector<TermViolation>& violations() const noexcept { return violations_; }

 private:
  static std::string Describe(const std::vector<TermViolation>& v) {
    std::string msg = "protected-term violations:";
    for (const auto& x : v) msg += " [" + x.source + ": '" + x.term + "']";
    return msg;
  }
  std::vector<TermViolation> violations_;
};

/// Violations over every entry that has a target. Entries with empty
/// target only count when they claim approved/edited status.
inline std::vector<TermViolation> ValidateTable(const FragmentTable& table,
                                                const std::vector<ProtectedTermRule>& rules) {
  std::vector<TermViolation> out;
  for (const auto& e : table) {
    if (e.target.empty() && !IsResolved(e.status)) continue;
    auto v = check_protected_terms(e, rules);
    out.insert(out.end(), v.begin(), v.end());
    if (IsResolved(e.status) && normalize_text(e.target).empty())
      out.push_back({e.source, "", "(empty target)"});
  }
  return out;
}

/// Only resolved entries gate persistence.
inline void RequirePersistable(const FragmentTable& table,
                               const std::vector<ProtectedTermRule>& rules) {
  std::vector<TermViolation> bad;
  for (const auto& e : table) {
    if (!IsResolved(e.status)) continue;
    if (normalize_text(e.target).empty()) {
      bad.push_back({e.source, "", "(empty target)"});
      continue;
    }
    auto v = check_protected_terms(e, rules);
    bad.insert(bad.end(), v.begin(), v.end());
  }
  if (!bad.empty()) throw ProtectedTermError(std::move(bad));
}

// ---------------------------------------------------------------------------
// Building and applying

using CandidateMap = std::map<std::string, std::string>;

/// One entry per distinct normalized zh fragment, counted with multiplicity.
inline FragmentTable build_table(const std::vector<Report>& corpus,
                                 const CandidateMap& candidates,
                                 std::u32string_view delimiters = DefaultDelimiters()) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& r : corpus) {
    if (r.language != Language::zh)
      throw InvalidArgument("build_table expects zh reports; '" + r.id + "' is " +
                            std::string(ToString(r.language)));
    for (const auto& f : segment_report(r, delimiters)) ++counts[f.normalized];
  }
  FragmentTable table;
  for (const auto& [source, n] : counts) {
    FragmentEntry e;
    e.source = source;
    e.occurrences = n;
    if (auto it = candidates.find(source); it != candidates.end()) e.target = it->second;
    table.Add(std::move(e));
  }
  return table;
}

struct JoinRule {
  std::string separator = ",";
  std::string terminal = ".";
};

/// Translates a zh report fragment-by-fragment. Any fragment without an
/// approved/edited entry aborts with the full list of unresolved fragments.
inline Report apply_table(const Report& report, const FragmentTable& table,
                          const JoinRule& join = {},
                          std::u32string_view delimiters = DefaultDelimiters()) {
  if (report.language != Language::zh)
    throw InvalidArgument("apply_table expects a zh report; '" + report.id + "' is en");
  const auto fragments = segment_report(report, delimiters);
  std::vector<std::string> unresolved;
  std::vector<std::string_view> targets;
  for (const auto& f : fragments) {
    const FragmentEntry* e = table.Find(f.normalized);
    if (e == nullptr || !IsResolved(e->status) || e->target.empty()) {
      if (std::find(unresolved.begin(), unresolved.end(), f.normalized) == unresolved.end())
        unresolved.push_back(f.normalized);
      continue;
    }
    targets.push_back(e->target);
  }
  if (!unresolved.empty()) throw UnresolvedFragmentsError(std::move(unresolved));
  Report out = report;
  out.language = Language::en;
  out.text.clear();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (i > 0) out.text += join.separator;
    out.text += targets[i];
  }
  out.text += join.terminal;
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

struct SiteCounts {
  std::uint64_t total_fragment_occurrences = 0;
  std::uint64_t unique_fragments = 0;

  friend bool operator==(const SiteCounts&, const SiteCounts&) = default;
};

struct CorpusStats {
  std::map<std::string, SiteCounts> per_site;
  SiteCounts overall;               // sums over sites
  std::uint64_t distinct_overall = 0;  // distinct fragments across all sites
};

inline CorpusStats table_stats(const std::vector<Report>& corpus,
                               std::u32string_view delimiters = DefaultDelimiters()) {
  std::map<std::string, std::set<std::string>> uniques;
  std::set<std::string> all;
  CorpusStats stats;
  for (const auto& r : corpus) {
    const std::string site = r.site.name();
    auto& counts = stats.per_site[site];
    for (const auto& f : segment_report(r, delimiters)) {
      ++counts.total_fragment_occurrences;
      uniques[site].insert(f.normalized);
      all.insert(f.normalized);
    }
  }
  for (auto& [site, counts] : stats.per_site) {
    counts.unique_fragments = uniques[site].size();
    stats.overall.total_fragment_occurrences += counts.total_fragment_occurrences;
    stats.overall.unique_fragments += counts.unique_fragments;
  }
  stats.distinct_overall = all.size();
  return stats;
}

// ---------------------------------------------------------------------------
// TSV persistence

namespace detail {

inline std::string EscapeField(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string UnescapeField(std::string_view s, std::size_t lineno) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(s[i]);
      continue;
    }
    if (++i == s.size()) throw ParseError(lineno, "dangling escape");
    switch (s[i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: throw ParseError(lineno, std::string("bad escape \\") + s[i]);
    }
  }
  return out;
}

inline std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace detail

inline constexpr std::string_view kTableHeader =
    "source\ttarget\tstatus\toccurrences\treviewer\tupdated_at";

/// Serializes without validation. Use WriteTable for persistence.
inline std::string SerializeTable(const FragmentTable& table) {
  std::string out(kTableHeader);
  out += '\n';
  for (const auto& e : table) {
    out += detail::EscapeField(e.source) + '\t' + detail::EscapeField(e.target) + '\t' +
           std::string(ToString(e.status)) + '\t' + std::to_string(e.occurrences) + '\t' +
           detail::EscapeField(e.reviewer.value_or("")) + '\t' +
           detail::EscapeField(e.updated_at) + '\n';
  }
  return out;
}

/// Serializes after enforcing the protected-term gate on resolved entries.
inline std::string WriteTable(const FragmentTable& table,
                              const std::vector<ProtectedTermRule>& rules) {
  RequirePersistable(table, rules);
  return SerializeTable(table);
}

inline void WriteTable(std::ostream& out, const FragmentTable& table,
                       const std::vector<ProtectedTermRule>& rules) {
  out << WriteTable(table, rules);
}

inline FragmentTable ReadTable(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing table header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTableHeader) throw ParseError(1, "unexpected table header");
  FragmentTable table;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = detail::SplitTabs(line);
    if (cols.size() != 6)
      throw ParseError(lineno, "expected 6 columns, got " + std::to_string(cols.size()));
    FragmentEntry e;
    e.source = detail::UnescapeField(cols[0], lineno);
    if (e.source.empty()) throw ParseError(lineno, "empty source");
    e.target = detail::UnescapeField(cols[1], lineno);
    auto status = ParseReviewStatus(cols[2]);
    if (!status) throw ParseError(lineno, "unknown status '" + std::string(cols[2]) + "'");
    e.status = *status;
    auto [ptr, ec] = std::from_chars(cols[3].data(), cols[3].data() + cols[3].size(),
                                     e.occurrences);
    if (ec != std::errc() || ptr != cols[3].data() + cols[3].size())
      throw ParseError(lineno, "bad occurrences '" + std::string(cols[3]) + "'");
    if (auto reviewer = detail::UnescapeField(cols[4], lineno); !reviewer.empty())
      e.reviewer = std::move(reviewer);
    e.updated_at = detail::UnescapeField(cols[5], lineno);
    try {
      table.Add(std::move(e));
    } catch (const InvalidArgument& err) {
      throw ParseError(lineno, err.what());
    }
  }
  return table;
}

/// Candidate translations: TSV (source, target); an optional
/// "source\ttarget" header is skipped. Keys and targets are normalized.
inline CandidateMap ReadCandidates(std::istream& in) {
  CandidateMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line == "source\ttarget") continue;
    auto cols = detail::SplitTabs(line);
    if (cols.size() != 2) throw ParseError(lineno, "expected 2 columns");
    std::string source = normalize_text(cols[0]);
    std::string target = normalize_text(cols[1]);
    if (source.empty()) throw ParseError(lineno, "empty source");
    auto [it, inserted] = out.emplace(source, target);
    if (!inserted && it->second != target)
      throw ParseError(lineno, "conflicting candidates for '" + source + "'");
  }
  return out;
}

}  // namespace usrep
