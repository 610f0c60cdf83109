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

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "usrep/config.hpp"
#include "usrep/datasetgen.hpp"
#include "usrep/error.hpp"
#include "usrep/io.hpp"
#include "usrep/lexicon.hpp"
#include "usrep/metrics/evaluate.hpp"
#include "usrep/report.hpp"
#include "usrep/segmenter.hpp"

// Batch commands behind the `usrep` tool. Each command writes its artifact
// plus "<out>.manifest.json" holding the resolved config, outputs, warnings
// and errors. Exit code 0 iff the manifest has no errors.

namespace usrep::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitMissingInput = 3,
  kExitUnavailable = 4,  // lock held, bind failure
};

struct Manifest {
  Manifest(std::string cmd, nlohmann::ordered_json cfg) : command(std::move(cmd)), config(std::move(cfg)) {}

  std::string command;
  nlohmann::ordered_json config;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
  std::vector<std::string> errors;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();

  nlohmann::ordered_json ToJson() const {
    return {{"command", command}, {"config", config},     {"outputs", outputs},
            {"summary", summary}, {"warnings", warnings}, {"errors", errors}};
  }
};

inline std::string ManifestPath(const std::string& out) { return out + ".manifest.json"; }

inline void WriteText(const std::string& path, const std::string& content) {
  io::AtomicWriteFile(path, content);
}

/// Runs `body`, maps exceptions to exit codes and always writes the manifest
/// when an output path is known.
inline int Run(Manifest& manifest, const std::string& out, const std::function<void()>& body) {
  int code = kExitOk;
  try {
    body();
    if (!manifest.errors.empty()) code = kExitFailure;
  } catch (const io::MissingInputError& e) {
    manifest.errors.push_back(e.what());
    code = kExitMissingInput;
  } catch (const io::LockHeldError& e) {
    manifest.errors.push_back(e.what());
    code = kExitUnavailable;
  } catch (const std::exception& e) {
    manifest.errors.push_back(e.what());
    code = kExitFailure;
  }
  for (const auto& e : manifest.errors) std::cerr << "error: " << e << '\n';
  for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << '\n';
  if (!out.empty()) {
    try {
      WriteText(ManifestPath(out), manifest.ToJson().dump(2) + "\n");
    } catch (const std::exception& e) {
      std::cerr << "error: cannot write manifest: " << e.what() << '\n';
      if (code == kExitOk) code = kExitFailure;
    }
  }
  return code;
}

inline std::vector<Report> LoadCorpus(const std::string& path) {
  io::RequireFile(path);
  return ReadCorpusFile(path);
}

inline std::vector<ProtectedTermRule> LoadRules(const ToolConfig& config) {
  auto rules = DefaultProtectedTerms();
  if (!config.protected_terms_path.empty()) {
    std::istringstream in(io::ReadFile(config.protected_terms_path));
    rules = MergeRules(std::move(rules), ReadProtectedTerms(in));
  }
  return rules;
}

inline FragmentTable LoadTable(const std::string& path) {
  std::istringstream in(io::ReadFile(path));
  return ReadTable(in);
}

// ---------------------------------------------------------------------------

struct SegmentArgs {
  std::string corpus, out;
};

inline int cmd_segment(const ToolConfig& config, const SegmentArgs& a) {
  Manifest m{"segment", ToJson(config)};
  return Run(m, a.out, [&] {
    const auto corpus = LoadCorpus(a.corpus);
    std::string out;
    std::size_t fragments = 0;
    for (const auto& r : corpus) {
      nlohmann::ordered_json frags = nlohmann::ordered_json::array();
      for (const auto& f : segment_report(r, config.delimiters)) {
        frags.push_back({{"index", f.index}, {"raw", f.raw}, {"normalized", f.normalized}});
        ++fragments;
      }
      nlohmann::ordered_json rec = {{"id", r.id},
                                    {"site", r.site.name()},
                                    {"language", ToString(r.language)},
                                    {"fragments", std::move(frags)}};
      out += rec.dump() + "\n";
    }
    WriteText(a.out, out);
    m.outputs.push_back(a.out);
    m.summary = {{"reports", corpus.size()}, {"fragments", fragments}};
  });
}

struct BuildTableArgs {
  std::string corpus, candidates, out;
};

inline int cmd_build_table(const ToolConfig& config, const BuildTableArgs& a) {
  Manifest m{"build-table", ToJson(config)};
  return Run(m, a.out, [&] {
    const auto corpus = LoadCorpus(a.corpus);
    CandidateMap candidates;
    if (!a.candidates.empty()) {
      std::istringstream in(io::ReadFile(a.candidates));
      candidates = ReadCandidates(in);
    }
    const auto rules = LoadRules(config);
    io::FileLock lock(a.out);
    const auto table = build_table(corpus, candidates, config.delimiters);
    WriteText(a.out, WriteTable(table, rules));
    m.outputs.push_back(a.out);
    std::size_t with_target = 0;
    for (const auto& e : table) with_target += e.target.empty() ? 0 : 1;
    m.summary = {{"entries", table.size()}, {"with_candidate", with_target}};
  });
}

struct ValidateTableArgs {
  std::string table, out;
};

inline int cmd_validate_table(const ToolConfig& config, const ValidateTableArgs& a) {
  Manifest m{"validate-table", ToJson(config)};
  return Run(m, a.out, [&] {
    const auto rules = LoadRules(config);
    io::FileLock lock(a.table);
    const auto table = LoadTable(a.table);
    const auto violations = ValidateTable(table, rules);
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& v : violations) {
      list.push_back({{"source", v.source}, {"pattern", v.pattern}, {"term", v.term}});
      m.errors.push_back("protected term '" + v.term + "' missing from target of '" + v.source + "'");
    }
    nlohmann::ordered_json report = {{"table", a.table},
                                     {"entries", table.size()},
                                     {"violations", std::move(list)}};
    WriteText(a.out, report.dump(2) + "\n");
    m.outputs.push_back(a.out);
    m.summary = {{"entries", table.size()}, {"violations", violations.size()}};
  });
}

struct GenDatasetArgs {
  std::string corpus, table, out, skips;
};

inline int cmd_gen_dataset(const ToolConfig& config, const GenDatasetArgs& a) {
  Manifest m{"gen-dataset", ToJson(config)};
  return Run(m, a.out, [&] {
    const auto corpus = LoadCorpus(a.corpus);
    const auto rules = LoadRules(config);
    io::FileLock lock(a.table);
    const auto table = LoadTable(a.table);
    if (auto v = ValidateTable(table, rules); !v.empty()) throw ProtectedTermError(std::move(v));
    GenOptions opt;
    opt.prompts = config.prompts;
    opt.join = config.join;
    opt.delimiters = config.delimiters;
    opt.query_images = config.query_images;
    const auto result = gen_samples(corpus, table, opt);
    const JsonlImageOptions img{config.image_placeholder, config.image_token_count};
    std::string data, skips;
    for (const auto& s : result.samples) data += SampleToJson(s, img).dump() + "\n";
    for (const auto& s : result.skips) {
      skips += SkipToJson(s).dump() + "\n";
      m.warnings.push_back("report '" + s.id + "' has " + std::to_string(s.unresolved_fragments.size()) +
                           " unresolved fragment(s); English prompt types skipped");
    }
    const std::string skips_path = a.skips.empty() ? a.out + ".skips.jsonl" : a.skips;
    WriteText(a.out, data);
    WriteText(skips_path, skips);
    m.outputs = {a.out, skips_path};
    m.summary = {{"reports", corpus.size()},
                 {"samples", result.samples.size()},
                 {"skipped_reports", result.skips.size()}};
  });
}

struct StatsArgs {
  std::string corpus, out;
};

inline nlohmann::ordered_json ToJson(const CorpusStats& s) {
  nlohmann::ordered_json sites = nlohmann::ordered_json::object();
  for (const auto& [name, c] : s.per_site)
    sites[name] = {{"total_fragment_occurrences", c.total_fragment_occurrences},
                   {"unique_fragments", c.unique_fragments}};
  return {{"per_site", std::move(sites)},
          {"overall",
           {{"total_fragment_occurrences", s.overall.total_fragment_occurrences},
            {"unique_fragments", s.overall.unique_fragments}}},
          {"distinct_overall", s.distinct_overall}};
}

inline int cmd_stats(const ToolConfig& config, const StatsArgs& a) {
  Manifest m{"stats", ToJson(config)};
  return Run(m, a.out, [&] {
    const auto stats = table_stats(LoadCorpus(a.corpus), config.delimiters);
    WriteText(a.out, ToJson(stats).dump(2) + "\n");
    m.outputs.push_back(a.out);
  });
}

struct EvalArgs {
  std::string hyps, refs, embeddings, baseline, out;
};

inline int cmd_eval(const ToolConfig& config, const EvalArgs& a) {
  Manifest m{"eval", ToJson(config)};
  return Run(m, a.out, [&] {
    const auto hyps = LoadCorpus(a.hyps);
    const auto refs = LoadCorpus(a.refs);
    if (config.keywords_path.empty()) throw ConfigError("a keyword list is required (--keywords)");
    const auto keywords =
        metrics::KeywordListFromJson(nlohmann::json::parse(io::ReadFile(config.keywords_path)));
    std::optional<metrics::EmbeddingProvider> embeddings;
    if (!a.embeddings.empty()) {
      std::istringstream in(io::ReadFile(a.embeddings));
      embeddings = metrics::EmbeddingProvider::Read(in);
    }
    const auto report = metrics::evaluate_corpus(hyps, refs, keywords,
                                                 embeddings ? &*embeddings : nullptr, config.eval);
    auto j = metrics::ToJson(report);
    if (!a.baseline.empty()) {
      const auto base =
          metrics::MetricReportFromJson(nlohmann::json::parse(io::ReadFile(a.baseline)));
      j["baseline"] = a.baseline;
      j["gains_percent"] = metrics::ToJson(metrics::compare_runs(report, base));
    }
    WriteText(a.out, j.dump(2) + "\n");
    m.outputs.push_back(a.out);
    m.summary = j["corpus"];
  });
}

struct DiffArgs {
  std::string pred, ref, out;
};

inline int cmd_diff(const ToolConfig& config, const DiffArgs& a) {
  Manifest m{"diff", ToJson(config)};
  return Run(m, a.out, [&] {
    const auto preds = LoadCorpus(a.pred);
    const auto refs = LoadCorpus(a.ref);
    std::map<std::string, const Report*> by_id;
    for (const auto& p : preds) by_id.emplace(p.id, &p);
    std::vector<std::string> missing_ids;
    for (const auto& r : refs)
      if (!by_id.count(r.id)) missing_ids.push_back(r.id);
    if (!missing_ids.empty() || preds.size() != refs.size()) {
      std::string msg = "prediction and reference ids differ:";
      for (const auto& id : missing_ids) msg += " " + id;
      throw IncomparableError(msg);
    }
    std::string out;
    std::size_t extra = 0, missing = 0, matched = 0;
    for (const auto& r : refs) {
      const auto d = fragment_diff(*by_id.at(r.id), r, config.delimiters);
      nlohmann::ordered_json jm = nlohmann::ordered_json::array(), je = jm, jx = jm;
      for (const auto& [p, q] : d.matched) jm.push_back({p.raw, q.raw});
      for (const auto& f : d.extra) je.push_back(f.raw);
      for (const auto& f : d.missing) jx.push_back(f.raw);
      matched += d.matched.size();
      extra += d.extra.size();
      missing += d.missing.size();
      nlohmann::ordered_json rec = {
          {"id", r.id}, {"matched", std::move(jm)}, {"extra", std::move(je)}, {"missing", std::move(jx)}};
      out += rec.dump() + "\n";
    }
    WriteText(a.out, out);
    m.outputs.push_back(a.out);
    m.summary = {{"matched", matched}, {"extra", extra}, {"missing", missing}};
  });
}

}  // namespace usrep::cli
