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

#include "usrep/review.hpp"

#include <gtest/gtest.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <sstream>
#include <string>
#include <thread>

#include "httplib.h"
#include "support/temp_dir.hpp"
#include "usrep/io.hpp"
#include "usrep/review_server.hpp"

using namespace usrep;
using review::ReviewStore;
using review::SourceHash;

namespace {

Report Zh(std::string id, std::string site, std::string text) {
  Report r;
  r.id = std::move(id);
  r.site = Site::Parse(site);
  r.text = std::move(text);
  r.images = {"1.png", "2.png"};
  return r;
}

std::vector<Report> Corpus() {
  return {Zh("r1", "thyroid", "甲状腺大小正常，CFDI未见异常血流信号。"),
          Zh("r2", "thyroid", "甲状腺大小正常，包膜完整。"),
          Zh("r3", "liver", "肝脏大小正常，包膜完整。")};
}

class ReviewStoreTest : public ::testing::Test {
 protected:
  void SetUp() override {
    CandidateMap c = {{"CFDI未见异常血流信号", "CFDI shows no abnormal blood flow signal"},
                      {"甲状腺大小正常", "thyroid size is normal"},
                      {"包膜完整", "capsule intact"}};
    table_path_ = dir_ / "table.tsv";
    io::AtomicWriteFile(table_path_, WriteTable(build_table(Corpus(), c), DefaultProtectedTerms()));
  }

  std::unique_ptr<ReviewStore> Open() {
    review::StoreOptions opt;
    opt.table_path = table_path_;
    opt.clock = [] { return std::string("2026-10-16T12:00:00Z"); };
    opt.page_size = 2;
    return std::make_unique<ReviewStore>(std::move(opt), Corpus());
  }

  usrep::testing::TempDir dir_;
  std::string table_path_;
};

}  // namespace

TEST_F(ReviewStoreTest, FreshTableListsEverythingPending) {
  auto store = Open();
  auto r = store->List(ReviewStatus::pending, "", 1);
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["total"], 4);
  EXPECT_EQ(r.body["items"].size(), 2u);  // page size 2
  EXPECT_EQ(store->List(ReviewStatus::pending, "", 2).body["items"].size(), 2u);
  EXPECT_EQ(store->List(ReviewStatus::pending, "", 3).body["items"].size(), 0u);
  EXPECT_EQ(store->List(ReviewStatus::approved, "", 1).body["total"], 0);
  // Highest-occurrence fragments first.
  EXPECT_EQ(r.body["items"][0]["occurrences"], 2);
}

TEST_F(ReviewStoreTest, SiteFilterAndContexts) {
  auto store = Open();
  auto r = store->List(std::nullopt, "liver", 1);
  EXPECT_EQ(r.body["total"], 2);
  const auto& item = r.body["items"][0];
  EXPECT_FALSE(item["examples"].empty());
  EXPECT_LE(item["examples"].size(), 3u);
  bool saw_protected = false;
  for (int page = 1; page <= 2; ++page) {
    const auto listing = store->List(std::nullopt, "thyroid", page);
    for (const auto& it : listing.body["items"])
      if (!it["protected_terms"].empty() && it["protected_terms"][0] == "CFDI") saw_protected = true;
  }
  EXPECT_TRUE(saw_protected);
}

TEST_F(ReviewStoreTest, ApproveIsPersistedAndAudited) {
  auto store = Open();
  const std::string h = SourceHash("包膜完整");
  auto r = store->Decide(h, {{"action", "approve"}, {"reviewer", "dr.li"}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["status"], "approved");
  EXPECT_EQ(r.body["reviewer"], "dr.li");
  EXPECT_EQ(r.body["updated_at"], "2026-10-16T12:00:00Z");
  EXPECT_EQ(store->List(ReviewStatus::approved, "", 1).body["total"], 1);
  // Reopening from disk shows the same state.
  auto reopened = Open();
  EXPECT_EQ(reopened->List(ReviewStatus::approved, "", 1).body["items"][0]["source"], "包膜完整");
  const auto audit = usrep::testing::Slurp(table_path_ + ".audit.jsonl");
  auto rec = nlohmann::json::parse(audit.substr(0, audit.find('\n')));
  EXPECT_EQ(rec["previous_status"], "pending");
  EXPECT_EQ(rec["status"], "approved");
}

TEST_F(ReviewStoreTest, EditDroppingProtectedTermIs422) {
  auto store = Open();
  const std::string h = SourceHash("CFDI未见异常血流信号");
  auto r = store->Decide(h, {{"action", "edit"}, {"target", "no abnormal color flow"}, {"reviewer", "x"}});
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["error"], "protected_term_violation");
  EXPECT_EQ(r.body["violations"][0]["term"], "CFDI");
  // Unchanged in memory and on disk.
  EXPECT_EQ(store->List(ReviewStatus::pending, "", 1).body["total"], 4);
  std::istringstream in(usrep::testing::Slurp(table_path_));
  EXPECT_EQ(ReadTable(in).Find("CFDI未见异常血流信号")->status, ReviewStatus::pending);
}

TEST_F(ReviewStoreTest, ApproveOfViolatingCandidateIs422) {
  // Swap the candidate for one that lost the protected term.
  FragmentTable t;
  FragmentEntry e{"CFDI未见异常血流信号", "no abnormal flow", ReviewStatus::pending, 1, std::nullopt, ""};
  t.Add(e);
  io::AtomicWriteFile(table_path_, WriteTable(t, DefaultProtectedTerms()));
  auto store = Open();
  auto r = store->Decide(SourceHash(e.source), {{"action", "approve"}, {"reviewer", "x"}});
  EXPECT_EQ(r.status, 422);
  std::istringstream in(usrep::testing::Slurp(table_path_));
  EXPECT_EQ(ReadTable(in).Find(e.source)->status, ReviewStatus::pending);
}

TEST_F(ReviewStoreTest, EditAndRejectTransitions) {
  auto store = Open();
  const std::string h = SourceHash("甲状腺大小正常");
  auto r = store->Decide(h, {{"action", "edit"}, {"target", "  normal   thyroid size "}, {"reviewer", "x"}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["status"], "edited");
  EXPECT_EQ(r.body["target"], "normal thyroid size");
  r = store->Decide(h, {{"action", "reject"}, {"reviewer", "y"}});
  EXPECT_EQ(r.body["status"], "rejected");
  EXPECT_EQ(store->List(ReviewStatus::pending, "", 1).body["total"], 3);
}

TEST_F(ReviewStoreTest, BadRequests) {
  auto store = Open();
  const std::string h = SourceHash("包膜完整");
  EXPECT_EQ(store->Decide("0000000000000000", {{"action", "approve"}, {"reviewer", "x"}}).status, 404);
  EXPECT_EQ(store->Decide(h, {{"action", "bless"}, {"reviewer", "x"}}).status, 400);
  EXPECT_EQ(store->Decide(h, {{"action", "approve"}}).status, 400);
  EXPECT_EQ(store->Decide(h, {{"action", "edit"}, {"reviewer", "x"}}).status, 400);
  EXPECT_EQ(store->Decide(h, {{"action", "edit"}, {"target", " "}, {"reviewer", "x"}}).status, 422);
}

TEST_F(ReviewStoreTest, StatsMatchTableStats) {
  auto store = Open();
  auto s = store->Stats().body;
  EXPECT_EQ(s["per_site"]["thyroid"]["total_fragment_occurrences"], 4);
  EXPECT_EQ(s["per_site"]["liver"]["unique_fragments"], 2);
  EXPECT_EQ(s["overall"]["total_fragment_occurrences"], 6);
}

TEST_F(ReviewStoreTest, HttpRoundTrip) {
  auto store = Open();
  review::ReviewServer server(*store);
  const int port = server.Bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  server.Start();
  httplib::Client client("127.0.0.1", port);

  auto res = client.Get("/api/fragments?status=pending");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body)["total"], 4);

  const std::string h = SourceHash("包膜完整");
  res = client.Post("/api/fragments/" + h, R"({"action":"approve","reviewer":"dr"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  res = client.Get("/api/fragments?status=approved");
  EXPECT_EQ(nlohmann::json::parse(res->body)["items"][0]["source"], "包膜完整");

  res = client.Post("/api/fragments/" + SourceHash("CFDI未见异常血流信号"),
                    R"({"action":"edit","target":"no flow","reviewer":"dr"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  EXPECT_EQ(nlohmann::json::parse(res->body)["violations"][0]["term"], "CFDI");

  res = client.Post("/api/fragments/" + h, "{not json", "application/json");
  EXPECT_EQ(res->status, 400);
  res = client.Get("/api/stats");
  EXPECT_EQ(nlohmann::json::parse(res->body)["overall"]["unique_fragments"], 5);
  server.Stop();
}

TEST(AtomicWriteTest, KilledWriterNeverLeavesPartialFile) {
  usrep::testing::TempDir dir;
  const std::string path = dir / "table.tsv";
  FragmentTable small, big;
  small.Add({"A", "a", ReviewStatus::approved, 1, std::string("r"), "t"});
  for (int i = 0; i < 20000; ++i)
    big.Add({"fragment-" + std::to_string(i), "target-" + std::to_string(i), ReviewStatus::pending,
             static_cast<std::uint64_t>(i + 1), std::nullopt, ""});
  const std::string v1 = SerializeTable(small), v2 = SerializeTable(big);
  io::AtomicWriteFile(path, v1);
  for (int round = 0; round < 10; ++round) {
    pid_t pid = ::fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
      for (;;) {
        io::AtomicWriteFile(path, v2);
        io::AtomicWriteFile(path, v1);
      }
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5 + round * 3));
    ::kill(pid, SIGKILL);
    ::waitpid(pid, nullptr, 0);
    const std::string now = usrep::testing::Slurp(path);
    ASSERT_TRUE(now == v1 || now == v2) << "partial table of " << now.size() << " bytes";
    std::istringstream in(now);
    EXPECT_NO_THROW(ReadTable(in));
  }
}

TEST(FileLockTest, SecondLockFails) {
  usrep::testing::TempDir dir;
  const std::string path = dir / "t.tsv";
  io::FileLock first(path);
  EXPECT_THROW(io::FileLock second(path), io::LockHeldError);
}
