// Copyright 2026 The OpenEI Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
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

#include "openei/api.hpp"

namespace openei {

/// HTTP/1.1 front end for an ApiService. Routes every /ei_algorithms and
/// /ei_data request to ApiService::handle and serves telemetry on /stats.
class HttpServer {
 public:
  explicit HttpServer(ApiService& api);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds without serving yet. Port 0 picks a free port. Returns the bound
  /// port; throws BindFailure.
  int bind(const std::string& host, int port);
  /// Serves on a background thread.
  void start();
  /// Stops accepting and waits for in-flight requests.
  void stop();
  int port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace openei
