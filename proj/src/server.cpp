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

#include "openei/server.hpp"

#include <httplib.h>

namespace openei {

struct HttpServer::Impl {
  explicit Impl(ApiService& api) : api(api) {}

  void reply(const httplib::Request& req, httplib::Response& res) {
    auto target = req.target.empty() ? req.path : req.target;
    auto response = api.handle(req.method, target, req.body, req.get_header_value("Content-Type"));
    res.status = response.http_status;
    res.set_content(response.to_json().dump(), "application/json");
  }

  ApiService& api;
  httplib::Server server;
};

HttpServer::HttpServer(ApiService& api) : impl_(std::make_unique<Impl>(api)) {
  auto& server = impl_->server;
  auto* impl = impl_.get();
  // httplib's default also sets SO_REUSEPORT, which would let a second
  // server share a busy port instead of failing.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  server.Get("/stats", [impl](const httplib::Request&, httplib::Response& res) {
    res.set_content(impl->api.stats().dump(), "application/json");
  });
  auto route = [impl](const httplib::Request& req, httplib::Response& res) { impl->reply(req, res); };
  server.Get(R"(/.*)", route);
  server.Post(R"(/.*)", route);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& server = impl_->server;
  if (port == 0) {
    port_ = server.bind_to_any_port(host);
  } else {
    port_ = server.bind_to_port(host, port) ? port : -1;
  }
  if (port_ < 0) {
    throw Error(ErrorCode::BindFailure, "cannot bind " + host + ":" + std::to_string(port),
                {{"host", host}, {"port", port}});
  }
  return port_;
}

void HttpServer::start() {
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace openei
