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

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "usrep/error.hpp"
#include "usrep/lexicon.hpp"
#include "usrep/report.hpp"

namespace usrep {

/// The four cross-language training formulations.
enum class PromptType { ZhFromImages, EnFromImages, EnFromZhQuery, ZhFromEnQuery };

inline constexpr std::array<PromptType, 4> kPromptTypes = {
    PromptType::ZhFromImages, PromptType::EnFromImages, PromptType::EnFromZhQuery,
    PromptType::ZhFromEnQuery};

inline std::string_view ToString(PromptType t) {
  switch (t) {
    case PromptType::ZhFromImages: return "ZhFromImages";
    case PromptType::EnFromImages: return "EnFromImages";
    case PromptType::EnFromZhQuery: return "EnFromZhQuery";
    case PromptType::ZhFromEnQuery: return "ZhFromEnQuery";
  }
  return "ZhFromImages";
}

inline PromptType ParsePromptType(std::string_view s) {
  for (auto t : kPromptTypes)
    if (ToString(t) == s) return t;
  throw ConfigError("unknown prompt type '" + std::string(s) + "'");
}

inline Language TargetLanguage(PromptType t) {
  return (t == PromptType::ZhFromImages || t == PromptType::ZhFromEnQuery) ? Language::zh
                                                                           : Language::en;
}

inline bool IsQuery(PromptType t) {
  return t == PromptType::EnFromZhQuery || t == PromptType::ZhFromEnQuery;
}

struct PromptText {
  std::string system;
  std::string user;  // "{report}" is replaced by the query report text
};

/// Instruction strings per prompt type. Defaults are plain paraphrases of
/// the four task formulations; override them from a config file.
struct PromptTexts {
  std::array<PromptText, 4> texts;

  static PromptTexts Defaults() {
    const std::string system =
        "You are an experienced ultrasound physician. Write standardized "
        "ultrasound reports composed of clinical findings.";
    PromptTexts p;
    p.texts[0] = {system, "请根据这两张超声图像生成标准化的中文超声报告。"};
    p.texts[1] = {system,
                  "Generate a standardized English ultrasound report from these two "
                  "ultrasound images."};
    p.texts[2] = {system,
                  "Write the standardized English ultrasound report for the following "
                  "Chinese report:\n{report}"};
    p.texts[3] = {system, "请根据以下英文超声报告生成对应的标准化中文超声报告：\n{report}"};
    return p;
  }

  const PromptText& operator[](PromptType t) const {
    return texts[static_cast<std::size_t>(t)];
  }
  PromptText& operator[](PromptType t) { return texts[static_cast<std::size_t>(t)]; }
};

inline nlohmann::ordered_json ToJson(const PromptTexts& p) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (auto t : kPromptTypes)
    j[std::string(ToString(t))] = {{"system", p[t].system}, {"user", p[t].user}};
  return j;
}

/// Missing prompt types keep their defaults; unknown keys are an error.
inline PromptTexts PromptTextsFromJson(const nlohmann::json& j) {
  PromptTexts p = PromptTexts::Defaults();
  if (!j.is_object()) throw ConfigError("prompts must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const PromptType t = ParsePromptType(it.key());
    if (!it->is_object()) throw ConfigError("prompt '" + it.key() + "' must be an object");
    if (auto s = it->find("system"); s != it->end()) p[t].system = s->get<std::string>();
    if (auto u = it->find("user"); u != it->end()) p[t].user = u->get<std::string>();
  }
  return p;
}

/// One SFT record.
struct SftSample {
  std::string report_id;
  PromptType prompt_type = PromptType::ZhFromImages;
  std::string system;
  std::string user;
  std::vector<std::string> images;  // 0 or 2
  std::string target;
  Language target_language = Language::zh;

  friend bool operator==(const SftSample&, const SftSample&) = default;
};

struct SkipRecord {
  std::string id;
  std::string reason;
  std::vector<std::string> unresolved_fragments;
  std::vector<PromptType> skipped_types;
};

struct GenOptions {
  PromptTexts prompts = PromptTexts::Defaults();
  JoinRule join;
  std::u32string delimiters = DefaultDelimiters();
  bool query_images = true;  // attach the two images to *FromQuery samples
};

struct GenResult {
  std::vector<SftSample> samples;
  std::vector<SkipRecord> skips;
};

namespace detail {

inline std::string FillTemplate(std::string_view tmpl, std::string_view report) {
  static constexpr std::string_view kSlot = "{report}";
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    auto hit = tmpl.find(kSlot, pos);
    if (hit == std::string_view::npos) break;
    out.append(tmpl.substr(pos, hit - pos));
    out.append(report);
    pos = hit + kSlot.size();
  }
  out.append(tmpl.substr(pos));
  return out;
}

}  // namespace detail

/// Emits the four prompt types per fully-resolved report in a fixed order.
/// A report the table cannot translate yields only ZhFromImages (the
/// EnFromQuery variant needs an English query, which does not exist) and a
/// skip record listing its unresolved fragments.
inline GenResult gen_samples(const std::vector<Report>& zh_corpus, const FragmentTable& table,
                             const GenOptions& options = {}) {
  GenResult result;
  for (const auto& report : zh_corpus) {
    if (report.language != Language::zh)
      throw InvalidArgument("gen_samples expects zh reports; '" + report.id + "' is en");
    std::optional<Report> english;
    try {
      english = apply_table(report, table, options.join, options.delimiters);
    } catch (const UnresolvedFragmentsError& e) {
      result.skips.push_back({report.id,
                              "unresolved fragments",
                              e.fragments(),
                              {PromptType::EnFromImages, PromptType::EnFromZhQuery,
                               PromptType::ZhFromEnQuery}});
    }
    const std::vector<std::string> images(report.images.begin(), report.images.end());
    for (auto type : kPromptTypes) {
      if (!english && type != PromptType::ZhFromImages) continue;
      const PromptText& prompt = options.prompts[type];
      SftSample s;
      s.report_id = report.id;
      s.prompt_type = type;
      s.system = prompt.system;
      s.target_language = TargetLanguage(type);
      s.target = s.target_language == Language::zh ? report.text : english->text;
      switch (type) {
        case PromptType::EnFromZhQuery:
          s.user = detail::FillTemplate(prompt.user, report.text);
          break;
        case PromptType::ZhFromEnQuery:
          s.user = detail::FillTemplate(prompt.user, english->text);
          break;
        default:
          s.user = prompt.user;
      }
      if (!IsQuery(type) || options.query_images) s.images = images;
      result.samples.push_back(std::move(s));
    }
  }
  return result;
}

struct JsonlImageOptions {
  std::string placeholder = "<image>";
  int per_image = 1;
};

/// Chat-format record; images are referenced by path only.
inline nlohmann::ordered_json SampleToJson(const SftSample& s,
                                           const JsonlImageOptions& img = {}) {
  std::string user;
  for (std::size_t i = 0; i < s.images.size() * static_cast<std::size_t>(img.per_image); ++i)
    user += img.placeholder;
  if (!user.empty()) user += '\n';
  user += s.user;
  nlohmann::ordered_json messages = nlohmann::ordered_json::array();
  messages.push_back({{"role", "system"}, {"content", s.system}});
  messages.push_back({{"role", "user"}, {"content", user}});
  messages.push_back({{"role", "assistant"}, {"content", s.target}});
  return {{"id", s.report_id + "/" + std::string(ToString(s.prompt_type))},
          {"prompt_type", ToString(s.prompt_type)},
          {"messages", std::move(messages)},
          {"images", s.images}};
}

inline nlohmann::ordered_json SkipToJson(const SkipRecord& r) {
  nlohmann::ordered_json types = nlohmann::ordered_json::array();
  for (auto t : r.skipped_types) types.push_back(ToString(t));
  return {{"id", r.id},
          {"reason", r.reason},
          {"unresolved_fragments", r.unresolved_fragments},
          {"skipped_prompt_types", std::move(types)}};
}

// ---------------------------------------------------------------------------
// Token assembly

using TokenId = std::int32_t;

/// Any tokenizer usable for sequence assembly. decode must invert encode.
template <class T>
concept Tokenizer = requires(const T& t, std::string_view s, std::span<const TokenId> ids) {
  { t.encode(s) } -> std::convertible_to<std::vector<TokenId>>;
  { t.decode(ids) } -> std::convertible_to<std::string>;
  { t.image_placeholder() } -> std::convertible_to<TokenId>;
};

/// Reference tokenizer: one token per byte, image placeholder = 256.
class ByteTokenizer {
 public:
  static constexpr TokenId kImagePlaceholder = 256;

  std::vector<TokenId> encode(std::string_view s) const {
    std::vector<TokenId> ids;
    ids.reserve(s.size());
    for (unsigned char c : s) ids.push_back(static_cast<TokenId>(c));
    return ids;
  }

  std::string decode(std::span<const TokenId> ids) const {
    std::string out;
    out.reserve(ids.size());
    for (TokenId id : ids) {
      if (id < 0 || id > 255)
        throw InvalidArgument("byte tokenizer cannot decode id " + std::to_string(id));
      out.push_back(static_cast<char>(static_cast<unsigned char>(id)));
    }
    return out;
  }

  TokenId image_placeholder() const { return kImagePlaceholder; }
};
static_assert(Tokenizer<ByteTokenizer>);

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct SegmentSpans {
  Span system, image, user, target;
};

/// Token ids plus a supervision mask that is true only on target tokens.
struct TokenSequence {
  std::vector<TokenId> tokens;
  std::vector<bool> supervised;
  SegmentSpans spans;

  std::size_t size() const { return tokens.size(); }
};

/// Layout: system ++ image placeholders ++ user ++ target. With
/// include_target=false this is the inference-time prompt.
template <Tokenizer T>
TokenSequence assemble_token_sequence(const SftSample& sample, const T& tokenizer,
                                      int image_token_count, bool include_target) {
  if (sample.system.empty() && sample.user.empty())
    throw InvalidArgument("degenerate prompt: system and user are both empty");
  if (!sample.images.empty() && image_token_count <= 0)
    throw InvalidArgument("image_token_count must be positive when images are present");
  TokenSequence seq;
  auto append = [&](const std::vector<TokenId>& ids, bool supervised) {
    Span span{seq.tokens.size(), seq.tokens.size() + ids.size()};
    seq.tokens.insert(seq.tokens.end(), ids.begin(), ids.end());
    seq.supervised.insert(seq.supervised.end(), ids.size(), supervised);
    return span;
  };
  seq.spans.system = append(tokenizer.encode(sample.system), false);
  const std::size_t image_tokens =
      sample.images.empty() ? 0
                            : sample.images.size() * static_cast<std::size_t>(image_token_count);
  seq.spans.image =
      append(std::vector<TokenId>(image_tokens, tokenizer.image_placeholder()), false);
  seq.spans.user = append(tokenizer.encode(sample.user), false);
  seq.spans.target =
      include_target ? append(tokenizer.encode(sample.target), true)
                     : Span{seq.tokens.size(), seq.tokens.size()};
  return seq;
}

/// Negative log-likelihood summed over supervised positions only.
inline double compute_masked_loss(std::span<const double> logprobs, const TokenSequence& seq) {
  if (logprobs.size() != seq.size())
    throw InvalidArgument("logprob count " + std::to_string(logprobs.size()) +
                          " does not match sequence length " + std::to_string(seq.size()));
  double loss = 0.0;
  for (std::size_t i = 0; i < logprobs.size(); ++i) {
    if (!(logprobs[i] <= 0.0))
      throw InvalidArgument("logprob at position " + std::to_string(i) + " is not <= 0");
    if (seq.supervised[i]) loss -= logprobs[i];
  }
  return loss;
}

}  // namespace usrep
