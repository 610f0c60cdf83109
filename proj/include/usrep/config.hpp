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

#include "json.hpp"
#include "usrep/datasetgen.hpp"
#include "usrep/error.hpp"
#include "usrep/lexicon.hpp"
#include "usrep/metrics/evaluate.hpp"
#include "usrep/segmenter.hpp"
#include "usrep/text.hpp"

namespace usrep {

/// Every knob a command can use. Resolution order is flags > config file >
/// these defaults; the resolved value is echoed into each run manifest.
struct ToolConfig {
  std::u32string delimiters = DefaultDelimiters();
  JoinRule join;
  PromptTexts prompts = PromptTexts::Defaults();
  bool query_images = true;
  int image_token_count = 1;  // placeholders per image in emitted JSONL
  std::string image_placeholder = "<image>";
  metrics::EvalConfig eval;
  std::string keywords_path;
  std::string protected_terms_path;
  std::string table_path;
};

inline nlohmann::ordered_json ToJson(const ToolConfig& c) {
  return {{"delimiters", text::Encode(c.delimiters)},
          {"join", {{"separator", c.join.separator}, {"terminal", c.join.terminal}}},
          {"prompts", ToJson(c.prompts)},
          {"query_images", c.query_images},
          {"image_token_count", c.image_token_count},
          {"image_placeholder", c.image_placeholder},
          {"eval", metrics::ToJson(c.eval)},
          {"keywords_path", c.keywords_path},
          {"protected_terms_path", c.protected_terms_path},
          {"table_path", c.table_path}};
}

/// Overlays the keys present in `j` onto `base`.
inline ToolConfig ApplyConfigJson(ToolConfig base, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    if (j.contains("delimiters")) {
      base.delimiters = text::Decode(j.at("delimiters").get<std::string>());
      if (base.delimiters.empty()) throw ConfigError("delimiters must not be empty");
    }
    if (j.contains("join")) {
      const auto& jn = j.at("join");
      base.join.separator = jn.value("separator", base.join.separator);
      base.join.terminal = jn.value("terminal", base.join.terminal);
    }
    if (j.contains("prompts")) base.prompts = PromptTextsFromJson(j.at("prompts"));
    base.query_images = j.value("query_images", base.query_images);
    base.image_token_count = j.value("image_token_count", base.image_token_count);
    if (base.image_token_count <= 0) throw ConfigError("image_token_count must be positive");
    base.image_placeholder = j.value("image_placeholder", base.image_placeholder);
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      if (e.contains("tokenization"))
        base.eval.tokenization = metrics::ParseTokenization(e.at("tokenization").get<std::string>());
      if (e.contains("bleu_mode"))
        base.eval.bleu_mode = metrics::ParseBleuMode(e.at("bleu_mode").get<std::string>());
      base.eval.cider_scale = e.value("cider_scale", base.eval.cider_scale);
      base.eval.rouge_beta = e.value("rouge_beta", base.eval.rouge_beta);
    }
    base.keywords_path = j.value("keywords_path", base.keywords_path);
    base.protected_terms_path = j.value("protected_terms_path", base.protected_terms_path);
    base.table_path = j.value("table_path", base.table_path);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  return base;
}

}  // namespace usrep
