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
#include <cstddef>
#include <span>
#include <vector>

#include "usrep/error.hpp"
#include "usrep/metrics/tokenize.hpp"

namespace usrep::metrics {

inline std::size_t LcsLength(const Tokens& a, const Tokens& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// LCS-based F-measure for one pair; beta > 1 weights recall.
inline double rouge_l_pair(const TokenizedPair& pair, double beta = 1.0) {
  const std::size_t lcs = LcsLength(pair.hyp, pair.ref);
  if (lcs == 0) return 0.0;
  const double p = static_cast<double>(lcs) / static_cast<double>(pair.hyp.size());
  const double r = static_cast<double>(lcs) / static_cast<double>(pair.ref.size());
  const double b2 = beta * beta;
  return (1.0 + b2) * p * r / (r + b2 * p);
}

inline double rouge_l(std::span<const TokenizedPair> pairs, double beta = 1.0) {
  if (pairs.empty()) throw InvalidArgument("ROUGE-L needs at least one pair");
  double sum = 0.0;
  for (const auto& p : pairs) sum += rouge_l_pair(p, beta);
  return sum / static_cast<double>(pairs.size());
}

}  // namespace usrep::metrics
