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

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "openei/device.hpp"
#include "openei/selector.hpp"

namespace openei {

/// Everything a node needs, from one JSON file plus OPENEI_* environment
/// overrides. Relative paths resolve against the config file's directory.
struct ServiceConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  std::string registry_path = "registry.jsonl";
  std::string profiles_path = "profiles.alem.jsonl";
  std::string data_dir = "data";
  std::string artifact_dir = "artifacts";
  Objective default_objective = Objective::Accuracy;
  std::size_t ring_capacity = 1024;
  std::size_t queue_capacity = 1024;
  std::size_t workers = 1;
  std::string device_id = "edge-0";
  std::vector<DeviceSpec> devices;
  std::vector<std::string> sensors;

  DeviceCatalog device_catalog() const;
};

ServiceConfig default_config();

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Loads `path` (defaults when nullopt) and applies environment overrides:
/// OPENEI_BIND_ADDRESS, OPENEI_PORT, OPENEI_REGISTRY_PATH,
/// OPENEI_PROFILES_PATH, OPENEI_DATA_DIR, OPENEI_ARTIFACT_DIR,
/// OPENEI_DEFAULT_OBJECTIVE, OPENEI_RING_CAPACITY, OPENEI_QUEUE_CAPACITY,
/// OPENEI_WORKERS, OPENEI_DEVICE_ID. Throws ConfigError naming the path or
/// variable at fault.
ServiceConfig load_config(const std::optional<std::string>& path,
                          const EnvLookup& env = process_env);

ServiceConfig config_from_json(const nlohmann::json& doc, const std::string& base_dir = "");

}  // namespace openei
