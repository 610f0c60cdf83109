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

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "usrep/error.hpp"
#include "usrep/metrics/bleu.hpp"
#include "usrep/metrics/cider.hpp"
#include "usrep/metrics/embedding.hpp"
#include "usrep/metrics/mkf1.hpp"
#include "usrep/metrics/rouge.hpp"
#include "usrep/metrics/tokenize.hpp"
#include "usrep/report.hpp"

namespace usrep::metrics {

struct EvalConfig {
  Tokenization tokenization = Tokenization::builtin;
  BleuMode bleu_mode = BleuMode::corpus;
  double cider_scale = 10.0;
  double rouge_beta = 1.0;
};

inline std::string_view ToString(BleuMode m) { return m == BleuMode::corpus ? "corpus" : "sentence"; }
inline std::string_view ToString(Tokenization t) {
  return t == Tokenization::builtin ? "builtin" : "whitespace";
}
inline BleuMode ParseBleuMode(std::string_view s) {
  if (s == "corpus") return BleuMode::corpus;
  if (s == "sentence") return BleuMode::sentence;
  throw ConfigError("unknown BLEU mode '" + std::string(s) + "'");
}
inline Tokenization ParseTokenization(std::string_view s) {
  if (s == "builtin") return Tokenization::builtin;
  if (s == "whitespace") return Tokenization::whitespace;
  throw ConfigError("unknown tokenization '" + std::string(s) + "'");
}

inline nlohmann::ordered_json ToJson(const EvalConfig& c) {
  return {{"tokenization", ToString(c.tokenization)},
          {"bleu_mode", ToString(c.bleu_mode)},
          {"cider_scale", c.cider_scale},
          {"rouge_beta", c.rouge_beta}};
}

struct SampleMetrics {
  std::string id;
  double b1 = 0, b4 = 0, rl = 0, cider = 0, mkf1 = 0;
  std::optional<double> embed_f1;
};

struct MetricReport {
  double b1 = 0, b4 = 0, rl = 0, cider = 0, mkf1 = 0, mkf1_micro = 0;
  std::optional<double> embed_f1;
  std::vector<SampleMetrics> per_sample;
  std::size_t corpus_size = 0;
  EvalConfig config;

  /// Corpus-level values by name, in a fixed order; absent metrics omitted.
  std::vector<std::pair<std::string, double>> Values() const {
    std::vector<std::pair<std::string, double>> v = {
        {"b1", b1}, {"b4", b4}, {"rl", rl}, {"cider", cider}, {"mkf1", mkf1}, {"mkf1_micro", mkf1_micro}};
    if (embed_f1) v.emplace_back("embed_f1", *embed_f1);
    return v;
  }
};

/// Scores hypotheses against references aligned by id (reference order).
/// embed_f1 is computed only when a provider is given.
inline MetricReport evaluate_corpus(const std::vector<Report>& hyps, const std::vector<Report>& refs,
                                    const KeywordList& keywords,
                                    const EmbeddingProvider* embeddings = nullptr,
                                    const EvalConfig& config = {}) {
  std::map<std::string, const Report*> by_id;
  for (const auto& h : hyps)
    if (!by_id.emplace(h.id, &h).second) throw InvalidArgument("duplicate hypothesis id '" + h.id + "'");
  std::set<std::string> ref_ids;
  std::vector<std::string> unmatched;
  for (const auto& r : refs) {
    if (!ref_ids.insert(r.id).second) throw InvalidArgument("duplicate reference id '" + r.id + "'");
    if (!by_id.count(r.id)) unmatched.push_back("ref:" + r.id);
  }
  for (const auto& h : hyps)
    if (!ref_ids.count(h.id)) unmatched.push_back("hyp:" + h.id);
  if (!unmatched.empty() || refs.empty()) {
    std::string msg = "hypotheses and references are not aligned by id:";
    for (const auto& u : unmatched) msg += " " + u;
    if (refs.empty()) msg += " (no references)";
    throw IncomparableError(msg);
  }

  std::vector<TokenizedPair> pairs;
  std::vector<KeywordPair> keyword_pairs;
  for (const auto& r : refs) {
    const Report& h = *by_id.at(r.id);
    if (h.language != r.language)
      throw IncomparableError("language mismatch for id '" + r.id + "'");
    pairs.push_back({tokenize_for_metrics(h.text, h.language, config.tokenization),
                     tokenize_for_metrics(r.text, r.language, config.tokenization), r.language});
    keyword_pairs.push_back({h.text, r.text, r.site.name()});
  }

  MetricReport out;
  out.config = config;
  out.corpus_size = pairs.size();
  out.b1 = bleu(pairs, 1, config.bleu_mode);
  out.b4 = bleu(pairs, 4, config.bleu_mode);
  out.rl = rouge_l(pairs, config.rouge_beta);
  const auto c = cider(pairs, {config.cider_scale, 4});
  out.cider = c.score;
  const auto k = mkf1(keyword_pairs, keywords);
  out.mkf1 = k.macro;
  out.mkf1_micro = k.micro;

  double embed_sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    SampleMetrics s;
    s.id = refs[i].id;
    s.b1 = sentence_bleu(pairs[i], 1);
    s.b4 = sentence_bleu(pairs[i], 4);
    s.rl = rouge_l_pair(pairs[i], config.rouge_beta);
    s.cider = c.per_item[i];
    s.mkf1 = k.per_pair[i];
    if (embeddings != nullptr) {
      const auto& e = embeddings->Get(s.id);
      s.embed_f1 = greedy_embed_f1(e.hyp, e.ref);
      embed_sum += *s.embed_f1;
    }
    out.per_sample.push_back(std::move(s));
  }
  if (embeddings != nullptr) out.embed_f1 = embed_sum / static_cast<double>(pairs.size());
  return out;
}

/// Relative gain of `a` over `b` in percent, one decimal. nullopt when the
/// baseline value is zero.
struct Gain {
  std::string metric;
  std::optional<double> percent;
};

inline std::optional<double> RelativeGainPercent(double a, double b) {
  if (b == 0.0) return std::nullopt;
  const double pct = (a - b) / b * 100.0;
  const double rounded = std::round(pct * 10.0) / 10.0;
  return rounded == 0.0 ? 0.0 : rounded;  // no "-0.0"
}

/// Gains for every metric present in both reports.
inline std::vector<Gain> compare_runs(const MetricReport& a, const MetricReport& b) {
  std::vector<Gain> out;
  const auto bv = b.Values();
  for (const auto& [name, value] : a.Values()) {
    for (const auto& [bname, bvalue] : bv) {
      if (bname == name) {
        out.push_back({name, RelativeGainPercent(value, bvalue)});
        break;
      }
    }
  }
  return out;
}

inline nlohmann::ordered_json ToJson(const MetricReport& r) {
  nlohmann::ordered_json corpus = nlohmann::ordered_json::object();
  for (const auto& [name, value] : r.Values()) corpus[name] = value;
  if (!r.embed_f1) corpus["embed_f1"] = nullptr;
  nlohmann::ordered_json samples = nlohmann::ordered_json::array();
  for (const auto& s : r.per_sample) {
    nlohmann::ordered_json j = {{"id", s.id}, {"b1", s.b1}, {"b4", s.b4},
                                {"rl", s.rl}, {"cider", s.cider}, {"mkf1", s.mkf1}};
    j["embed_f1"] = s.embed_f1 ? nlohmann::ordered_json(*s.embed_f1) : nullptr;
    samples.push_back(std::move(j));
  }
  return {{"config", ToJson(r.config)},
          {"corpus", std::move(corpus)},
          {"corpus_size", r.corpus_size},
          {"per_sample", std::move(samples)}};
}

inline nlohmann::ordered_json ToJson(const std::vector<Gain>& gains) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& g : gains) j[g.metric] = g.percent ? nlohmann::ordered_json(*g.percent) : nullptr;
  return j;
}

/// Reads the corpus block of a previously written report (for baselines).
inline MetricReport MetricReportFromJson(const nlohmann::json& j) {
  MetricReport r;
  const auto& c = j.at("corpus");
  auto get = [&](const char* key, double& dst) {
    if (!c.contains(key) || !c.at(key).is_number())
      throw ParseError(0, std::string("metric report lacks '") + key + "'");
    dst = c.at(key).get<double>();
  };
  get("b1", r.b1);
  get("b4", r.b4);
  get("rl", r.rl);
  get("cider", r.cider);
  get("mkf1", r.mkf1);
  get("mkf1_micro", r.mkf1_micro);
  if (c.contains("embed_f1") && c.at("embed_f1").is_number()) r.embed_f1 = c.at("embed_f1").get<double>();
  r.corpus_size = j.value("corpus_size", std::size_t{0});
  if (j.contains("config")) {
    const auto& cfg = j.at("config");
    r.config.tokenization = ParseTokenization(cfg.value("tokenization", "builtin"));
    r.config.bleu_mode = ParseBleuMode(cfg.value("bleu_mode", "corpus"));
    r.config.cider_scale = cfg.value("cider_scale", 10.0);
    r.config.rouge_beta = cfg.value("rouge_beta", 1.0);
  }
  return r;
}

}  // namespace usrep::metrics
