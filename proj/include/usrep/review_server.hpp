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

#include <memory>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "usrep/review.hpp"

namespace usrep::review {

/// Binds the review API (and optionally a static UI bundle) to a store.
///
///   GET  /api/fragments?status=S&site=X&page=N
///   POST /api/fragments/{hash}   {"action", "target"?, "reviewer"}
///   GET  /api/stats
class ReviewServer {
 public:
  explicit ReviewServer(ReviewStore& store, const std::string& static_dir = {}) : store_(store) {
    auto send = [](httplib::Response& res, const Response& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json; charset=utf-8");
    };
    server_.Get("/api/fragments", [this, send](const httplib::Request& req, httplib::Response& res) {
      std::optional<ReviewStatus> status;
      if (req.has_param("status")) {
        status = ParseReviewStatus(req.get_param_value("status"));
        if (!status) return send(res, {400, {{"error", "unknown status"}}});
      }
      std::size_t page = 1;
      if (req.has_param("page")) {
        try {
          page = std::stoul(req.get_param_value("page"));
        } catch (const std::exception&) {
          return send(res, {400, {{"error", "bad page"}}});
        }
      }
      send(res, store_.List(status, req.has_param("site") ? req.get_param_value("site") : "", page));
    });
    server_.Post(R"(/api/fragments/([0-9a-f]{16}))",
                 [this, send](const httplib::Request& req, httplib::Response& res) {
                   nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
                   if (body.is_discarded()) return send(res, {400, {{"error", "invalid JSON body"}}});
                   send(res, store_.Decide(req.matches[1], body));
                 });
    server_.Get("/api/stats", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, store_.Stats());
    });
    if (!static_dir.empty()) server_.set_mount_point("/", static_dir);
  }

  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;
  ~ReviewServer() { Stop(); }

  /// Returns the bound port, or -1 on failure. Port 0 picks a free port.
  int Bind(const std::string& host, int port) {
    if (port == 0) return server_.bind_to_any_port(host);
    return server_.bind_to_port(host, port) ? port : -1;
  }

  /// Blocks serving requests until Stop().
  bool Listen() { return server_.listen_after_bind(); }

  void Start() {
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void Stop() {
    if (server_.is_running()) server_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  ReviewStore& store_;
  httplib::Server server_;
  std::thread thread_;
};

}  // namespace usrep::review
