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
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "usrep/error.hpp"
#include "usrep/text.hpp"

namespace usrep {

enum class Language { zh, en };

inline std::string_view ToString(Language lang) {
  return lang == Language::zh ? "zh" : "en";
}

inline Language ParseLanguage(std::string_view s) {
  if (s == "zh") return Language::zh;
  if (s == "en") return Language::en;
  throw InvalidArgument("unknown language '" + std::string(s) + "'");
}

/// Organ site. mammary, thyroid and liver are named; anything else
/// is carried through as `other` with its name.
class Site {
 public:
  enum class Kind { mammary, thyroid, liver, other };

  Site() = default;
  static Site Parse(std::string_view name) {
    if (name.empty()) throw InvalidArgument("empty site name");
    Site s;
    if (name == "mammary") {
      s.kind_ = Kind::mammary;
    } else if (name == "thyroid") {
      s.kind_ = Kind::thyroid;
    } else if (name == "liver") {
      s.kind_ = Kind::liver;
    } else {
      s.kind_ = Kind::other;
      s.other_ = std::string(name);
    }
    return s;
  }

  Kind kind() const noexcept { return kind_; }
  std::string name() const {
    switch (kind_) {
      case Kind::mammary: return "mammary";
      case Kind::thyroid: return "thyroid";
      case Kind::liver: return "liver";
      case Kind::other: return other_;
    }
    return other_;
  }

  friend bool operator==(const Site& a, const Site& b) {
    return a.kind_ == b.kind_ && a.other_ == b.other_;
  }

 private:
  Kind kind_ = Kind::other;
  std::string other_ = "unknown";
};

/// One standardized ultrasound report.
struct Report {
  std::string id;
  Site site;
  Language language = Language::zh;
  std::string text;
  std::array<std::string, 2> images;

  friend bool operator==(const Report&, const Report&) = default;
};

/// Parses one corpus record. Unknown fields are ignored.
inline Report ReportFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("record is not a JSON object");
  auto str = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
      throw InvalidArgument(std::string("missing string field '") + key + "'");
    return it->get<std::string>();
  };
  Report r;
  r.id = str("id");
  r.site = Site::Parse(str("site"));
  r.language = ParseLanguage(str("language"));
  r.text = str("text");
  if (text::Normalize(r.text).empty())
    throw InvalidArgument("report '" + r.id + "' has empty text");
  auto it = j.find("images");
  if (it == j.end() || !it->is_array() || it->size() != 2)
    throw InvalidArgument("report '" + r.id + "' must have exactly 2 images");
  for (std::size_t i = 0; i < 2; ++i) {
    if (!(*it)[i].is_string())
      throw InvalidArgument("report '" + r.id + "' image is not a string");
    r.images[i] = (*it)[i].get<std::string>();
  }
  return r;
}

inline nlohmann::ordered_json ReportToJson(const Report& r) {
  return {{"id", r.id},
          {"site", r.site.name()},
          {"language", ToString(r.language)},
          {"text", r.text},
          {"images", {r.images[0], r.images[1]}}};
}

/// Reads a JSON-lines corpus. Blank lines are skipped; any malformed line
/// raises ParseError carrying its 1-based line number.
inline std::vector<Report> ReadCorpus(std::istream& in) {
  std::vector<Report> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::Trim(text::Decode(line)).empty()) continue;
    try {
      out.push_back(ReportFromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    } catch (const InvalidArgument& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

inline std::vector<Report> ReadCorpusFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus '" + path + "'");
  return ReadCorpus(in);
}

inline void WriteCorpus(std::ostream& out, const std::vector<Report>& corpus) {
  for (const auto& r : corpus) out << ReportToJson(r).dump() << '\n';
}

}  // namespace usrep
