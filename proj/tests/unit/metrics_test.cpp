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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "support/metric_oracles.hpp"
#include "support/random_text.hpp"
#include "usrep/metrics/evaluate.hpp"

using namespace usrep;
using namespace usrep::metrics;

namespace {

Tokens Split(const std::string& s) { return tokenize_for_metrics(s, Language::en, Tokenization::whitespace); }

TokenizedPair Pair(const std::string& h, const std::string& r) { return {Split(h), Split(r), Language::en}; }

Report Rep(std::string id, std::string site, Language lang, std::string text) {
  Report r;
  r.id = std::move(id);
  r.site = Site::Parse(site);
  r.language = lang;
  r.text = std::move(text);
  r.images = {"1.png", "2.png"};
  return r;
}

}  // namespace

TEST(TokenizeTest, English) {
  EXPECT_EQ(tokenize_for_metrics("Thyroid size normal.", Language::en),
            (Tokens{"thyroid", "size", "normal"}));
  EXPECT_EQ(tokenize_for_metrics("CFDI: no-flow", Language::en), (Tokens{"cfdi", "no", "flow"}));
}

TEST(TokenizeTest, Chinese) {
  EXPECT_EQ(tokenize_for_metrics("甲状腺CFDI正常", Language::zh), (Tokens{"甲", "状", "腺", "CFDI", "正", "常"}));
  EXPECT_EQ(tokenize_for_metrics("大小约1.5cm，边界清。", Language::zh),
            (Tokens{"大", "小", "约", "1.5cm", "边", "界", "清"}));
  EXPECT_EQ(tokenize_for_metrics("ＣＦＤＩ（＋）", Language::zh), (Tokens{"CFDI"}));
}

TEST(TokenizeTest, Empty) {
  EXPECT_TRUE(tokenize_for_metrics("", Language::zh).empty());
  EXPECT_TRUE(tokenize_for_metrics("", Language::en).empty());
  EXPECT_TRUE(tokenize_for_metrics("，。", Language::zh).empty());
}

TEST(BleuTest, IdentityIsOne) {
  std::vector<TokenizedPair> p = {Pair("a b c d", "a b c d")};
  EXPECT_DOUBLE_EQ(bleu(p, 4), 1.0);
  EXPECT_DOUBLE_EQ(bleu(p, 4, BleuMode::sentence), 1.0);
}

TEST(BleuTest, BrevityPenaltyFixture) {
  std::vector<TokenizedPair> p = {Pair("a b c", "a b c d")};
  EXPECT_NEAR(bleu(p, 1), std::exp(1.0 - 4.0 / 3.0), 1e-12);
  EXPECT_NEAR(bleu(p, 1), 0.7165313105737893, 1e-12);
}

TEST(BleuTest, ClippingFixture) {
  std::vector<TokenizedPair> p = {Pair("a a a", "a b")};
  EXPECT_NEAR(bleu(p, 1), 1.0 / 3.0, 1e-12);
}

TEST(BleuTest, FrozenCorpusAndSentenceValues) {
  // tests/oracles/derive_fixtures.py
  std::vector<TokenizedPair> p = {Pair("the thyroid is normal in size", "the thyroid is normal in size and shape"),
                                  Pair("no nodule seen", "a nodule is seen in the left lobe"),
                                  Pair("liver echo is uniform", "the liver echo is uniform")};
  EXPECT_NEAR(bleu(p, 4), 0.48204449780828057, 1e-12);
  EXPECT_NEAR(bleu(p, 1), 0.4988612275260315, 1e-12);
  EXPECT_NEAR(bleu(p, 4, BleuMode::sentence), 0.5347931579289378, 1e-12);
}

TEST(BleuTest, ErrorsAndDegenerateCases) {
  std::vector<TokenizedPair> p = {Pair("a b", "a b")};
  EXPECT_THROW(bleu(p, 0), InvalidArgument);
  EXPECT_THROW(bleu(p, 5), InvalidArgument);
  EXPECT_THROW(bleu(std::vector<TokenizedPair>{}, 1), InvalidArgument);
  EXPECT_EQ(bleu(p, 4), 0.0);  // every hypothesis shorter than 4
  EXPECT_EQ(bleu(std::vector<TokenizedPair>{Pair("", "a")}, 1), 0.0);
}

TEST(BleuTest, PermutationInvariant) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TokenizedPair> p;
    for (int i = 0; i < 6; ++i)
      p.push_back({usrep::testing::RandomTokens(rng, 10), usrep::testing::RandomTokens(rng, 10), Language::en});
    const double c = bleu(p, 4), s = bleu(p, 4, BleuMode::sentence);
    std::shuffle(p.begin(), p.end(), rng);
    ASSERT_NEAR(bleu(p, 4), c, 1e-12);
    ASSERT_NEAR(bleu(p, 4, BleuMode::sentence), s, 1e-12);
  }
}

TEST(RougeLTest, Fixtures) {
  EXPECT_DOUBLE_EQ(rouge_l(std::vector<TokenizedPair>{Pair("a b c", "a b c")}), 1.0);
  EXPECT_DOUBLE_EQ(rouge_l(std::vector<TokenizedPair>{Pair("a b c d", "a c b d")}), 0.75);
  EXPECT_DOUBLE_EQ(rouge_l(std::vector<TokenizedPair>{Pair("x", "y")}), 0.0);
  EXPECT_DOUBLE_EQ(rouge_l(std::vector<TokenizedPair>{Pair("", "y")}), 0.0);
}

TEST(RougeLTest, RecallWeightedBeta) {
  // L=2, P=1, R=0.5; beta=2 -> 5*0.5/(0.5+4) = 5/9.
  EXPECT_NEAR(rouge_l_pair(Pair("a b", "a b c d"), 2.0), 5.0 / 9.0, 1e-12);
}

TEST(RougeLTest, MatchesBruteForceLcs) {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 500; ++i) {
    auto p = TokenizedPair{usrep::testing::RandomTokens(rng, 12, 4), usrep::testing::RandomTokens(rng, 12, 4), Language::en};
    ASSERT_EQ(LcsLength(p.hyp, p.ref), usrep::testing::BruteForceLcs(p.hyp, p.ref));
    ASSERT_EQ(rouge_l_pair(p), usrep::testing::BruteForceRougeL(p.hyp, p.ref));
  }
}

TEST(CiderTest, DisjointTwoItemIdentity) {
  std::vector<TokenizedPair> c = {Pair("a b c d", "a b c d"), Pair("w x y z", "e f g h")};
  auto r = cider(c);
  EXPECT_NEAR(r.per_item[0], 10.0, 1e-12);
  EXPECT_NEAR(r.per_item[1], 0.0, 1e-12);
  EXPECT_NEAR(r.score, 5.0, 1e-12);
}

TEST(CiderTest, SingleItemIsZero) {
  std::vector<TokenizedPair> c = {Pair("a b c d", "a b c d")};
  EXPECT_EQ(cider(c).score, 0.0);
}

TEST(CiderTest, FrozenThreeItemFixture) {
  // tests/oracles/derive_fixtures.py
  std::vector<TokenizedPair> c = {Pair("the thyroid is normal in size", "the thyroid is normal in size and shape"),
                                  Pair("no nodule seen", "a nodule is seen in the left lobe"),
                                  Pair("liver echo is uniform", "the liver echo is uniform")};
  auto r = cider(c);
  EXPECT_NEAR(r.score, 5.93066225609861, 1e-9);
  EXPECT_NEAR(r.per_item[0], 8.044154079216641, 1e-9);
  EXPECT_NEAR(r.per_item[1], 1.273760774332405, 1e-9);
  EXPECT_NEAR(r.per_item[2], 8.474071914746782, 1e-9);
  EXPECT_NEAR(cider(c, {1.0, 4}).score, 0.593066225609861, 1e-9);
}

TEST(CiderTest, MatchesFirstPrinciplesOracle) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TokenizedPair> c;
    std::vector<std::pair<usrep::testing::Toks, usrep::testing::Toks>> o;
    const int n = 1 + static_cast<int>(rng() % 10);
    for (int i = 0; i < n; ++i) {
      auto h = usrep::testing::RandomTokens(rng, 15, 6), r = usrep::testing::RandomTokens(rng, 15, 6);
      c.push_back({h, r, Language::en});
      o.emplace_back(h, r);
    }
    ASSERT_NEAR(cider(c).score, usrep::testing::FirstPrinciplesCider(o), 1e-9);
  }
}

TEST(RelabelingTest, MetricsInvariantUnderTokenBijection) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TokenizedPair> a, b;
    std::map<std::string, std::string> bij = {{"a", "q"}, {"b", "w"}, {"c", "e"}, {"d", "r"}, {"e", "t"}};
    auto relabel = [&](Tokens t) {
      for (auto& x : t) x = bij.at(x);
      return t;
    };
    for (int i = 0; i < 5; ++i) {
      auto h = usrep::testing::RandomTokens(rng, 10), r = usrep::testing::RandomTokens(rng, 10);
      a.push_back({h, r, Language::en});
      b.push_back({relabel(h), relabel(r), Language::en});
    }
    ASSERT_NEAR(bleu(a, 4), bleu(b, 4), 1e-12);
    ASSERT_NEAR(rouge_l(a), rouge_l(b), 1e-12);
    ASSERT_NEAR(cider(a).score, cider(b).score, 1e-9);
  }
}

TEST(Mkf1Test, Fixtures) {
  KeywordList kw = {{"thyroid", {"thyroid", "nodule", "calcification"}}};
  std::vector<KeywordPair> both = {{"Thyroid size normal", "thyroid normal", "thyroid"}};
  EXPECT_DOUBLE_EQ(mkf1(both, kw).macro, 1.0);
  std::vector<KeywordPair> partial = {{"thyroid normal", "thyroid nodule seen", "thyroid"}};
  EXPECT_NEAR(mkf1(partial, kw).macro, 2.0 / 3.0, 1e-12);
  std::vector<KeywordPair> none = {{"liver echo", "spleen echo", "thyroid"}};
  EXPECT_DOUBLE_EQ(mkf1(none, kw).macro, 1.0);
  std::vector<KeywordPair> hyp_only = {{"nodule", "nothing", "thyroid"}};
  EXPECT_DOUBLE_EQ(mkf1(hyp_only, kw).macro, 0.0);
}

TEST(Mkf1Test, MicroPoolsCounts) {
  KeywordList kw = {{"thyroid", {"thyroid", "nodule"}}};
  std::vector<KeywordPair> p = {{"thyroid", "thyroid nodule", "thyroid"}, {"nodule", "", "thyroid"}};
  auto r = mkf1(p, kw);
  EXPECT_EQ(r.tp, 1u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.fn, 1u);
  EXPECT_DOUBLE_EQ(r.micro, 0.5);
  EXPECT_NEAR(r.macro, (2.0 / 3.0 + 0.0) / 2.0, 1e-12);
}

TEST(Mkf1Test, UnknownSite) {
  KeywordList kw = {{"thyroid", {"thyroid"}}};
  std::vector<KeywordPair> p = {{"a", "b", "liver"}};
  EXPECT_THROW(mkf1(p, kw), InvalidArgument);
}

TEST(Mkf1Test, KeywordFileValidation) {
  EXPECT_THROW(KeywordListFromJson(nlohmann::json::parse(R"({"thyroid": ["  "]})")), ConfigError);
  EXPECT_THROW(KeywordListFromJson(nlohmann::json::parse(R"({"thyroid": "x"})")), ConfigError);
  auto kw = KeywordListFromJson(nlohmann::json::parse(R"({"liver": ["肝脏", " 回声  均匀 "]})"));
  EXPECT_EQ(kw.at("liver")[1], "回声 均匀");
}

TEST(GreedyEmbedTest, Fixtures) {
  TokenEmbeddings e = {{1, 2, 3}, {0, 1, 0}};
  EXPECT_NEAR(greedy_embed_f1(e, e), 1.0, 1e-12);
  EXPECT_EQ(greedy_embed_f1({{1, 0}}, {{0, 1}}), 0.0);
  // Hand cosine: P = R = (1 + 1/sqrt2)/2.
  EXPECT_NEAR(greedy_embed_f1({{1, 0}, {1, 1}}, {{1, 0}, {0, 1}}), 0.8535533905932737, 1e-12);
}

TEST(GreedyEmbedTest, Errors) {
  EXPECT_THROW(greedy_embed_f1({}, {{1.0}}), InvalidArgument);
  EXPECT_THROW(greedy_embed_f1({{1, 0}}, {{1, 0, 0}}), InvalidArgument);
  EXPECT_THROW(greedy_embed_f1({{1, std::nan("")}}, {{1, 0}}), InvalidArgument);
}

TEST(EvaluateCorpusTest, IdentityCorpus) {
  std::vector<Report> refs = {Rep("1", "thyroid", Language::en, "Thyroid size normal, no nodule seen."),
                              Rep("2", "liver", Language::zh, "肝脏大小正常，回声均匀。")};
  KeywordList kw = {{"thyroid", {"thyroid", "nodule"}}, {"liver", {"肝脏"}}};
  auto r = evaluate_corpus(refs, refs, kw);
  EXPECT_DOUBLE_EQ(r.b1, 1.0);
  EXPECT_DOUBLE_EQ(r.b4, 1.0);
  EXPECT_DOUBLE_EQ(r.rl, 1.0);
  EXPECT_DOUBLE_EQ(r.mkf1, 1.0);
  EXPECT_FALSE(r.embed_f1.has_value());
  EXPECT_EQ(r.corpus_size, 2u);
  EXPECT_EQ(r.per_sample.size(), 2u);
}

TEST(EvaluateCorpusTest, AlignsByIdAndReportsMismatch) {
  KeywordList kw = {{"thyroid", {"thyroid"}}};
  std::vector<Report> refs = {Rep("1", "thyroid", Language::en, "a b"), Rep("2", "thyroid", Language::en, "c d")};
  std::vector<Report> hyps = {refs[1], refs[0]};
  EXPECT_DOUBLE_EQ(evaluate_corpus(hyps, refs, kw).b1, 1.0);
  std::vector<Report> other = {Rep("9", "thyroid", Language::en, "a b")};
  try {
    evaluate_corpus(other, refs, kw);
    FAIL();
  } catch (const IncomparableError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("ref:1"), std::string::npos);
    EXPECT_NE(msg.find("hyp:9"), std::string::npos);
  }
  auto zh = refs;
  zh[0].language = Language::zh;
  EXPECT_THROW(evaluate_corpus(zh, refs, kw), IncomparableError);
}

TEST(EvaluateCorpusTest, FivePairFixtureCrossChecksEachMetric) {
  std::vector<Report> refs, hyps;
  const std::vector<std::pair<std::string, std::string>> texts = {
      {"thyroid size normal regular shape", "thyroid size normal regular shape intact capsule"},
      {"no nodule seen", "a nodule is seen in the left lobe"},
      {"liver echo uniform", "liver echo is uniform"},
      {"mammary gland structure clear", "mammary gland structure disordered"},
      {"cfdi shows no abnormal flow", "cfdi shows no abnormal blood flow"}};
  const std::vector<std::string> sites = {"thyroid", "thyroid", "liver", "mammary", "thyroid"};
  std::vector<TokenizedPair> pairs;
  std::vector<std::pair<usrep::testing::Toks, usrep::testing::Toks>> oracle_items;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    hyps.push_back(Rep(std::to_string(i), sites[i], Language::en, texts[i].first));
    refs.push_back(Rep(std::to_string(i), sites[i], Language::en, texts[i].second));
    pairs.push_back(Pair(texts[i].first, texts[i].second));
    oracle_items.emplace_back(pairs.back().hyp, pairs.back().ref);
  }
  KeywordList kw = {{"thyroid", {"thyroid", "nodule", "capsule"}}, {"liver", {"liver"}}, {"mammary", {"gland"}}};
  EmbeddingProvider emb;
  for (std::size_t i = 0; i < 5; ++i) emb.Set(std::to_string(i), {{{1.0, 0.0}}, {{1.0, double(i)}}});
  auto r = evaluate_corpus(hyps, refs, kw, &emb);
  EXPECT_NEAR(r.b1, bleu(pairs, 1), 1e-12);
  EXPECT_NEAR(r.b4, bleu(pairs, 4), 1e-12);
  double rl = 0;
  for (const auto& p : pairs) rl += usrep::testing::BruteForceRougeL(p.hyp, p.ref);
  EXPECT_NEAR(r.rl, rl / 5, 1e-12);
  EXPECT_NEAR(r.cider, usrep::testing::FirstPrinciplesCider(oracle_items), 1e-9);
  // Hand MKF1: pair0 {thyroid}/{thyroid,capsule} -> 2/3, pair1 {nodule}/{nodule} -> 1,
  // pair2 1, pair3 1, pair4 none/none -> 1.
  EXPECT_NEAR(r.mkf1, (2.0 / 3.0 + 4.0) / 5.0, 1e-12);
  double e = 0;
  for (int i = 0; i < 5; ++i) e += 1.0 / std::sqrt(1.0 + i * i);
  ASSERT_TRUE(r.embed_f1.has_value());
  EXPECT_NEAR(*r.embed_f1, e / 5, 1e-12);
}

TEST(CompareRunsTest, PublishedTableGains) {
  MetricReport kmve, multi;
  kmve.b4 = 0.668;
  kmve.rl = 0.774;
  kmve.cider = 3.499;
  kmve.mkf1 = 0.924;
  multi.b4 = 0.689;
  multi.rl = 0.804;
  multi.cider = 4.123;
  multi.mkf1 = 0.939;
  std::map<std::string, std::optional<double>> g;
  for (const auto& x : compare_runs(multi, kmve)) g[x.metric] = x.percent;
  EXPECT_DOUBLE_EQ(*g["b4"], 3.1);
  EXPECT_DOUBLE_EQ(*g["rl"], 3.9);
  EXPECT_DOUBLE_EQ(*g["cider"], 17.8);
  EXPECT_DOUBLE_EQ(*g["mkf1"], 1.6);
  EXPECT_FALSE(g["b1"].has_value());  // both zero: undefined
}

TEST(CompareRunsTest, SelfComparisonIsZero) {
  MetricReport a;
  a.b1 = 0.5;
  a.b4 = 0.3;
  a.rl = 0.6;
  a.cider = 2.0;
  a.mkf1 = 0.9;
  a.mkf1_micro = 0.8;
  a.embed_f1 = 0.7;
  for (const auto& g : compare_runs(a, a)) EXPECT_EQ(*g.percent, 0.0) << g.metric;
}

TEST(CompareRunsTest, ReportJsonRoundTrip) {
  MetricReport a;
  a.b1 = 0.25;
  a.cider = 1.5;
  auto back = MetricReportFromJson(nlohmann::json::parse(ToJson(a).dump()));
  EXPECT_EQ(back.b1, 0.25);
  EXPECT_EQ(back.cider, 1.5);
  EXPECT_FALSE(back.embed_f1.has_value());
}
