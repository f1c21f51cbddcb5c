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
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "openei/artifact_store.hpp"
#include "openei/config.hpp"
#include "openei/datastore.hpp"
#include "openei/error.hpp"
#include "openei/registry.hpp"
#include "openei/runtime.hpp"
#include "openei/selector.hpp"
#include "openei/uri.hpp"

namespace openei {

struct ApiResponse {
  bool ok = true;
  int http_status = 200;
  nlohmann::json body = nlohmann::json::object();
  std::optional<nlohmann::json> selection_trace;
  nlohmann::json error;  // {code, message, detail} when !ok

  static ApiResponse success(nlohmann::json body);
  static ApiResponse failure(const Error& error);

  /// {"status": "ok", "body": ..., "selection_trace": ...} or
  /// {"status": "error", "error": {...}}
  nlohmann::json to_json() const;
};

/// HTTP status for an error code.
int http_status_for(ErrorCode code) noexcept;

/// The libei request handlers. Transport-independent: the HTTP server and
/// in-process callers both go through handle().
class ApiService {
 public:
  struct Wiring {
    Registry& registry;
    DeviceCatalog devices;
    Datastore& datastore;
    Runtime& runtime;
    std::string device_id;
    Objective default_objective = Objective::Accuracy;
  };

  explicit ApiService(Wiring wiring);

  /// GET/POST on ei_algorithms invokes an algorithm; GET on ei_data reads,
  /// POST on ei_data ingests the body as a record.
  ApiResponse handle(std::string_view method, std::string_view target, std::string_view body = {},
                     std::string_view content_type = {});

  ApiResponse handle_algorithm(const ResourceUri& uri, std::string_view body = {},
                               std::string_view content_type = {});
  ApiResponse handle_data(const ResourceUri& uri);
  ApiResponse handle_ingest(const ResourceUri& uri, std::string_view body,
                            std::string_view content_type);

  /// Builds the selection query an algorithm request implies.
  SelectionQuery query_for(const ResourceUri& uri) const;

  nlohmann::json stats() const;

 private:
  Payload resolve_input(const ResourceUri& uri, std::string_view body,
                        std::string_view content_type) const;

  Wiring w_;
};

/// A whole edge node built from a ServiceConfig: registry, artifacts,
/// datastore, runtime (with the reference package installed) and the API.
class Deployment {
 public:
  explicit Deployment(const ServiceConfig& config);
  ~Deployment();

  const ServiceConfig& config() const noexcept { return config_; }
  Registry& registry() noexcept { return registry_; }
  ArtifactStore& artifacts() noexcept { return artifacts_; }
  Datastore& datastore() noexcept { return *datastore_; }
  Runtime& runtime() noexcept { return *runtime_; }
  ApiService& api() noexcept { return *api_; }

 private:
  ServiceConfig config_;
  Registry registry_;
  ArtifactStore artifacts_;
  std::unique_ptr<Datastore> datastore_;
  std::unique_ptr<Runtime> runtime_;
  std::unique_ptr<ApiService> api_;
};

}  // namespace openei
