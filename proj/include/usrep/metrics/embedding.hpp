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
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "usrep/error.hpp"

namespace usrep::metrics {

/// Per-token vectors of one text, all of the same dimension.
using TokenEmbeddings = std::vector<std::vector<double>>;

namespace detail {

inline std::size_t CheckEmbeddings(const TokenEmbeddings& e, const char* side) {
  if (e.empty()) throw InvalidArgument(std::string(side) + " embeddings are empty");
  const std::size_t dim = e.front().size();
  if (dim == 0) throw InvalidArgument(std::string(side) + " embeddings have dimension 0");
  for (const auto& v : e) {
    if (v.size() != dim) throw InvalidArgument(std::string(side) + " embeddings have mixed dimensions");
    for (double x : v)
      if (!std::isfinite(x)) throw InvalidArgument(std::string(side) + " embeddings contain NaN/inf");
  }
  return dim;
}

inline double Cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  const double denom = std::sqrt(aa) * std::sqrt(bb);
  return denom > 0 ? dot / denom : 0.0;
}

}  // namespace detail

/// BERTScore-style F1: each token is aligned to its most similar token on
/// the other side. The embedding model is external; only vectors are read.
inline double greedy_embed_f1(const TokenEmbeddings& hyp, const TokenEmbeddings& ref) {
  const std::size_t dh = detail::CheckEmbeddings(hyp, "hypothesis");
  const std::size_t dr = detail::CheckEmbeddings(ref, "reference");
  if (dh != dr)
    throw InvalidArgument("embedding dimension mismatch: " + std::to_string(dh) + " vs " +
                          std::to_string(dr));
  std::vector<double> best_ref(ref.size(), -2.0);
  double precision = 0.0;
  for (const auto& h : hyp) {
    double best = -2.0;
    for (std::size_t j = 0; j < ref.size(); ++j) {
      const double c = detail::Cosine(h, ref[j]);
      best = std::max(best, c);
      best_ref[j] = std::max(best_ref[j], c);
    }
    precision += best;
  }
  precision /= static_cast<double>(hyp.size());
  double recall = 0.0;
  for (double c : best_ref) recall += c;
  recall /= static_cast<double>(ref.size());
  const double sum = precision + recall;
  return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

struct EmbeddingPair {
  TokenEmbeddings hyp;
  TokenEmbeddings ref;
};

/// Embeddings keyed by report id, read from JSON-lines records
/// {"id", "role": "hyp"|"ref", "vectors": [[...], ...]}.
class EmbeddingProvider {
 public:
  static EmbeddingProvider Read(std::istream& in) {
    EmbeddingProvider p;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        const auto id = j.at("id").get<std::string>();
        const auto role = j.at("role").get<std::string>();
        auto vectors = j.at("vectors").get<TokenEmbeddings>();
        auto& slot = p.items_[id];
        if (role == "hyp") slot.hyp = std::move(vectors);
        else if (role == "ref") slot.ref = std::move(vectors);
        else throw ParseError(lineno, "role must be 'hyp' or 'ref'");
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(lineno, e.what());
      }
    }
    return p;
  }

  void Set(const std::string& id, EmbeddingPair pair) { items_[id] = std::move(pair); }

  const EmbeddingPair& Get(const std::string& id) const {
    auto it = items_.find(id);
    if (it == items_.end()) throw InvalidArgument("no embeddings for id '" + id + "'");
    return it->second;
  }

 private:
  std::map<std::string, EmbeddingPair> items_;
};

}  // namespace usrep::metrics
