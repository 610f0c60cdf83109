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
#include <cstddef>
#include <span>

#include "usrep/error.hpp"
#include "usrep/metrics/tokenize.hpp"

namespace usrep::metrics {

enum class BleuMode { corpus, sentence };

namespace detail {

struct NGramMatch {
  std::size_t matched = 0;  // clipped against the reference
  std::size_t total = 0;    // hypothesis n-grams
};

inline NGramMatch ClippedMatches(const Tokens& hyp, const Tokens& ref, std::size_t n) {
  NGramMatch m;
  if (hyp.size() < n) return m;
  m.total = hyp.size() - n + 1;
  const auto ref_counts = CountNGrams(ref, n);
  for (const auto& [gram, count] : CountNGrams(hyp, n)) {
    auto it = ref_counts.find(gram);
    if (it != ref_counts.end())
      m.matched += static_cast<std::size_t>(std::min(count, it->second));
  }
  return m;
}

inline double BrevityPenalty(double hyp_len, double ref_len) {
  if (hyp_len <= 0) return 0.0;
  return hyp_len >= ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
}

inline void CheckOrder(int n) {
  if (n < 1 || n > 4) throw InvalidArgument("BLEU order must be in 1..4, got " + std::to_string(n));
}

}  // namespace detail

/// Add-one smoothed BLEU-n for a single pair (orders with zero matches use
/// (0+1)/(total+1)).
inline double sentence_bleu(const TokenizedPair& pair, int n) {
  detail::CheckOrder(n);
  if (pair.hyp.empty()) return 0.0;
  double log_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    auto m = detail::ClippedMatches(pair.hyp, pair.ref, static_cast<std::size_t>(k));
    double p = m.matched == 0 ? 1.0 / static_cast<double>(m.total + 1)
                              : static_cast<double>(m.matched) / static_cast<double>(m.total);
    log_sum += std::log(p);
  }
  return detail::BrevityPenalty(static_cast<double>(pair.hyp.size()),
                                static_cast<double>(pair.ref.size())) *
         std::exp(log_sum / n);
}

/// BLEU-n with uniform weights. Corpus mode pools clipped counts and
/// lengths over all pairs; sentence mode averages sentence_bleu.
inline double bleu(std::span<const TokenizedPair> pairs, int n, BleuMode mode = BleuMode::corpus) {
  detail::CheckOrder(n);
  if (pairs.empty()) throw InvalidArgument("BLEU needs at least one pair");
  if (mode == BleuMode::sentence) {
    double sum = 0.0;
    for (const auto& p : pairs) sum += sentence_bleu(p, n);
    return sum / static_cast<double>(pairs.size());
  }
  double hyp_len = 0, ref_len = 0, log_sum = 0.0;
  for (const auto& p : pairs) {
    hyp_len += static_cast<double>(p.hyp.size());
    ref_len += static_cast<double>(p.ref.size());
  }
  for (int k = 1; k <= n; ++k) {
    std::size_t matched = 0, total = 0;
    for (const auto& p : pairs) {
      auto m = detail::ClippedMatches(p.hyp, p.ref, static_cast<std::size_t>(k));
      matched += m.matched;
      total += m.total;
    }
    if (total == 0 || matched == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
  }
  return detail::BrevityPenalty(hyp_len, ref_len) * std::exp(log_sum / n);
}

}  // namespace usrep::metrics
