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
#include <cmath>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "usrep/error.hpp"
#include "usrep/metrics/tokenize.hpp"

namespace usrep::metrics {

struct CiderOptions {
  double scale = 10.0;
  int max_n = 4;
};

struct CiderResult {
  double score = 0.0;
  std::vector<double> per_item;  // already scaled
};

/// Plain CIDEr with one reference per item. Document frequencies come from
/// references only; df is floored at 1, so hypothesis-only n-grams weigh
/// ln(N). A zero vector on either side contributes cosine 0.
inline CiderResult cider(std::span<const TokenizedPair> corpus, const CiderOptions& opt = {}) {
  if (corpus.empty()) throw InvalidArgument("CIDEr needs at least one item");
  const double num_items = static_cast<double>(corpus.size());
  CiderResult result;
  result.per_item.assign(corpus.size(), 0.0);

  for (int n = 1; n <= opt.max_n; ++n) {
    const auto order = static_cast<std::size_t>(n);
    std::vector<NGramCounts> hyp_counts, ref_counts;
    hyp_counts.reserve(corpus.size());
    ref_counts.reserve(corpus.size());
    std::unordered_map<std::string, int> doc_freq;
    for (const auto& item : corpus) {
      hyp_counts.push_back(CountNGrams(item.hyp, order));
      ref_counts.push_back(CountNGrams(item.ref, order));
      for (const auto& entry : ref_counts.back()) ++doc_freq[entry.first];
    }
    auto idf = [&](const std::string& gram) {
      auto it = doc_freq.find(gram);
      const double df = it == doc_freq.end() ? 1.0 : std::max(1.0, double(it->second));
      return std::log(num_items / df);
    };
    auto weights = [&](const NGramCounts& counts, std::size_t length) {
      std::unordered_map<std::string, double> w;
      if (length < order) return w;
      const double total = static_cast<double>(length - order + 1);
      for (const auto& [gram, c] : counts) w.emplace(gram, c / total * idf(gram));
      return w;
    };
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto h = weights(hyp_counts[i], corpus[i].hyp.size());
      const auto r = weights(ref_counts[i], corpus[i].ref.size());
      double dot = 0.0, hh = 0.0, rr = 0.0;
      for (const auto& [gram, v] : h) {
        hh += v * v;
        if (auto it = r.find(gram); it != r.end()) dot += v * it->second;
      }
      for (const auto& entry : r) rr += entry.second * entry.second;
      const double denom = std::sqrt(hh) * std::sqrt(rr);
      result.per_item[i] += denom > 0.0 ? dot / denom : 0.0;
    }
  }
  double sum = 0.0;
  for (double& s : result.per_item) {
    s = opt.scale * s / static_cast<double>(opt.max_n);
    sum += s;
  }
  result.score = sum / num_items;
  return result;
}

}  // namespace usrep::metrics
