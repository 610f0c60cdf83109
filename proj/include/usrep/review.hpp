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

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <ctime>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "usrep/error.hpp"
#include "usrep/io.hpp"
#include "usrep/lexicon.hpp"
#include "usrep/report.hpp"
#include "usrep/segmenter.hpp"
#include "usrep/text.hpp"

namespace usrep::review {

/// Lookup key used in review URLs.
inline std::string SourceHash(std::string_view source) { return text::Fnv1aHex(source); }

inline std::string UtcNowIso8601() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

enum class Action { approve, reject, edit };

inline std::optional<Action> ParseAction(std::string_view s) {
  if (s == "approve") return Action::approve;
  if (s == "reject") return Action::reject;
  if (s == "edit") return Action::edit;
  return std::nullopt;
}

/// HTTP-shaped outcome of a review call.
struct Response {
  int status = 200;
  nlohmann::ordered_json body;
};

struct StoreOptions {
  std::string table_path;
  std::string audit_path;  // empty: "<table>.audit.jsonl"
  std::vector<ProtectedTermRule> rules = DefaultProtectedTerms();
  std::u32string delimiters = DefaultDelimiters();
  std::size_t page_size = 50;
  std::size_t max_examples = 3;
  std::function<std::string()> clock = UtcNowIso8601;
};

/// Owns the table file while serving. Reads run concurrently; decisions are
/// applied one at a time and persisted by write-temp-then-rename before the
/// in-memory view changes.
class ReviewStore {
 public:
  ReviewStore(StoreOptions options, std::vector<Report> corpus)
      : options_(std::move(options)), corpus_(std::move(corpus)) {
    if (options_.audit_path.empty()) options_.audit_path = options_.table_path + ".audit.jsonl";
    std::istringstream in(io::ReadFile(options_.table_path));
    table_ = ReadTable(in);
    for (const auto& e : table_) {
      auto [it, fresh] = hash_to_source_.emplace(SourceHash(e.source), e.source);
      if (!fresh) throw Error("source hash collision between '" + it->second + "' and '" + e.source + "'");
    }
    for (const auto& r : corpus_) {
      for (const auto& f : segment_report(r, options_.delimiters)) {
        auto& ctx = contexts_[f.normalized];
        ctx.sites.insert(r.site.name());
        if (ctx.examples.size() < options_.max_examples &&
            (ctx.examples.empty() || ctx.examples.back() != &r))
          ctx.examples.push_back(&r);
      }
    }
    stats_ = table_stats(corpus_, options_.delimiters);
  }

  /// GET /api/fragments. `page` is 1-based.
  Response List(std::optional<ReviewStatus> status, const std::string& site, std::size_t page) const {
    std::shared_lock lock(mutex_);
    if (page == 0) page = 1;
    std::vector<const FragmentEntry*> hits;
    for (const auto& e : table_) {
      if (status && e.status != *status) continue;
      if (!site.empty()) {
        auto it = contexts_.find(e.source);
        if (it == contexts_.end() || !it->second.sites.count(site)) continue;
      }
      hits.push_back(&e);
    }
    nlohmann::ordered_json items = nlohmann::ordered_json::array();
    const std::size_t begin = (page - 1) * options_.page_size;
    for (std::size_t i = begin; i < hits.size() && i < begin + options_.page_size; ++i)
      items.push_back(EntryJson(*hits[i]));
    return {200,
            {{"items", std::move(items)},
             {"total", hits.size()},
             {"page", page},
             {"page_size", options_.page_size}}};
  }

  /// GET /api/stats
  Response Stats() const {
    nlohmann::ordered_json sites = nlohmann::ordered_json::object();
    for (const auto& [name, c] : stats_.per_site)
      sites[name] = {{"total_fragment_occurrences", c.total_fragment_occurrences},
                     {"unique_fragments", c.unique_fragments}};
    return {200,
            {{"per_site", std::move(sites)},
             {"overall",
              {{"total_fragment_occurrences", stats_.overall.total_fragment_occurrences},
               {"unique_fragments", stats_.overall.unique_fragments}}},
             {"distinct_overall", stats_.distinct_overall}}};
  }

  /// POST /api/fragments/{hash} with {"action", "target"?, "reviewer"}.
  Response Decide(const std::string& hash, const nlohmann::json& body) {
    std::unique_lock lock(mutex_);
    auto src = hash_to_source_.find(hash);
    if (src == hash_to_source_.end()) return Fail(404, "unknown fragment " + hash);
    if (!body.is_object()) return Fail(400, "body must be a JSON object");
    const auto action = body.contains("action") && body["action"].is_string()
                            ? ParseAction(body["action"].get<std::string>())
                            : std::nullopt;
    if (!action) return Fail(400, "action must be approve, reject or edit");
    if (!body.contains("reviewer") || !body["reviewer"].is_string() ||
        body["reviewer"].get<std::string>().empty())
      return Fail(400, "reviewer is required");
    const std::string reviewer = body["reviewer"].get<std::string>();

    FragmentTable next = table_;
    FragmentEntry& entry = *next.Find(src->second);
    const ReviewStatus previous = entry.status;
    switch (*action) {
      case Action::approve:
        if (normalize_text(entry.target).empty()) return Fail(422, "cannot approve an empty target");
        entry.status = ReviewStatus::approved;
        break;
      case Action::reject:
        entry.status = ReviewStatus::rejected;
        break;
      case Action::edit: {
        if (!body.contains("target") || !body["target"].is_string())
          return Fail(400, "edit requires a target");
        std::string target = normalize_text(body["target"].get<std::string>());
        if (target.empty()) return Fail(422, "edited target is empty");
        entry.target = std::move(target);
        entry.status = ReviewStatus::edited;
        break;
      }
    }
    if (IsResolved(entry.status)) {
      auto violations = check_protected_terms(entry, options_.rules);
      if (!violations.empty()) {
        nlohmann::ordered_json v = nlohmann::ordered_json::array();
        for (const auto& x : violations)
          v.push_back({{"source", x.source}, {"pattern", x.pattern}, {"term", x.term}});
        return {422, {{"error", "protected_term_violation"}, {"violations", std::move(v)}}};
      }
    }
    entry.reviewer = reviewer;
    entry.updated_at = options_.clock();
    const FragmentEntry updated = entry;

    try {
      io::AtomicWriteFile(options_.table_path, WriteTable(next, options_.rules));
    } catch (const ProtectedTermError& e) {
      return Fail(422, e.what());
    }
    table_ = std::move(next);
    AppendAudit({{"at", updated.updated_at},
                 {"hash", hash},
                 {"source", updated.source},
                 {"action", body["action"]},
                 {"reviewer", reviewer},
                 {"previous_status", ToString(previous)},
                 {"status", ToString(updated.status)},
                 {"target", updated.target}});
    return {200, EntryJson(updated)};
  }

  FragmentTable Snapshot() const {
    std::shared_lock lock(mutex_);
    return table_;
  }

 private:
  struct Context {
    std::set<std::string> sites;
    std::vector<const Report*> examples;
  };

  static Response Fail(int status, const std::string& message) {
    return {status, {{"error", message}}};
  }

  nlohmann::ordered_json EntryJson(const FragmentEntry& e) const {
    nlohmann::ordered_json sites = nlohmann::ordered_json::array();
    nlohmann::ordered_json examples = nlohmann::ordered_json::array();
    if (auto it = contexts_.find(e.source); it != contexts_.end()) {
      for (const auto& s : it->second.sites) sites.push_back(s);
      for (const Report* r : it->second.examples)
        examples.push_back({{"id", r->id}, {"site", r->site.name()}, {"text", r->text}});
    }
    nlohmann::ordered_json protected_terms = nlohmann::ordered_json::array();
    for (const auto& rule : options_.rules) {
      std::set<std::string> seen;
      for (auto m = std::sregex_iterator(e.source.begin(), e.source.end(), rule.regex());
           m != std::sregex_iterator(); ++m)
        if (m->length() > 0 && seen.insert(m->str()).second) protected_terms.push_back(m->str());
    }
    return {{"hash", SourceHash(e.source)},
            {"source", e.source},
            {"target", e.target},
            {"status", ToString(e.status)},
            {"occurrences", e.occurrences},
            {"reviewer", e.reviewer ? nlohmann::ordered_json(*e.reviewer) : nullptr},
            {"updated_at", e.updated_at},
            {"sites", std::move(sites)},
            {"examples", std::move(examples)},
            {"protected_terms", std::move(protected_terms)}};
  }

  void AppendAudit(const nlohmann::ordered_json& record) const {
    const std::string line = record.dump() + "\n";
    int fd = ::open(options_.audit_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) throw Error("cannot open audit log '" + options_.audit_path + "'");
    ssize_t n = ::write(fd, line.data(), line.size());
    ::close(fd);
    if (n != static_cast<ssize_t>(line.size())) throw Error("short write to audit log");
  }

  StoreOptions options_;
  std::vector<Report> corpus_;
  FragmentTable table_;
  std::unordered_map<std::string, std::string> hash_to_source_;
  std::unordered_map<std::string, Context> contexts_;
  CorpusStats stats_;
  mutable std::shared_mutex mutex_;
};

}  // namespace usrep::review
