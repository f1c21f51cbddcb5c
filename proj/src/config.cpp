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

#include "openei/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "openei/error.hpp"

namespace openei {

namespace fs = std::filesystem;

DeviceCatalog ServiceConfig::device_catalog() const {
  DeviceCatalog catalog;
  for (const auto& d : devices) catalog[d.device_id] = d;
  return catalog;
}

ServiceConfig default_config() {
  ServiceConfig cfg;
  // A Raspberry-Pi-class board.
  cfg.devices.push_back({"edge-0", 1ULL << 30, 500.0, 5.0, 1.0});
  return cfg;
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

namespace {

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

Objective objective_or_throw(const std::string& name, const std::string& where) {
  auto o = parse_objective(name);
  if (!o) throw Error(ErrorCode::ConfigError, where + ": unknown objective '" + name + "'");
  return *o;
}

std::size_t count_or_throw(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(text, &used);
    if (used != text.size() || v == 0) throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, where + ": expected a positive integer, got '" + text + "'");
  }
}

}  // namespace

ServiceConfig config_from_json(const nlohmann::json& doc, const std::string& base_dir) {
  ServiceConfig cfg = default_config();
  try {
    cfg.bind_address = doc.value("bind_address", cfg.bind_address);
    cfg.port = doc.value("port", cfg.port);
    cfg.registry_path = doc.value("registry_path", cfg.registry_path);
    cfg.profiles_path = doc.value("profiles_path", cfg.profiles_path);
    cfg.data_dir = doc.value("data_dir", cfg.data_dir);
    cfg.artifact_dir = doc.value("artifact_dir", cfg.artifact_dir);
    if (doc.contains("default_objective")) {
      cfg.default_objective =
          objective_or_throw(doc.at("default_objective").get<std::string>(), "default_objective");
    }
    cfg.ring_capacity = doc.value("ring_capacity", cfg.ring_capacity);
    cfg.queue_capacity = doc.value("queue_capacity", cfg.queue_capacity);
    cfg.workers = doc.value("workers", cfg.workers);
    cfg.device_id = doc.value("device_id", cfg.device_id);
    if (doc.contains("devices")) cfg.devices = doc.at("devices").get<std::vector<DeviceSpec>>();
    if (doc.contains("sensors")) cfg.sensors = doc.at("sensors").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("invalid config: ") + e.what());
  }
  cfg.registry_path = resolve(cfg.registry_path, base_dir);
  cfg.profiles_path = resolve(cfg.profiles_path, base_dir);
  cfg.data_dir = resolve(cfg.data_dir, base_dir);
  cfg.artifact_dir = resolve(cfg.artifact_dir, base_dir);
  return cfg;
}

ServiceConfig load_config(const std::optional<std::string>& path, const EnvLookup& env) {
  ServiceConfig cfg = default_config();
  if (path) {
    std::ifstream in(*path);
    if (!in) {
      throw Error(ErrorCode::ConfigError, "cannot read config file " + *path, {{"path", *path}});
    }
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigError, "config file " + *path + ": " + e.what(),
                  {{"path", *path}});
    }
    try {
      cfg = config_from_json(doc, fs::absolute(*path).parent_path().string());
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, *path + ": " + e.what(), {{"path", *path}});
    }
  }

  auto str = [&](const char* name, std::string& field) {
    if (auto v = env(name)) field = *v;
  };
  str("OPENEI_BIND_ADDRESS", cfg.bind_address);
  str("OPENEI_REGISTRY_PATH", cfg.registry_path);
  str("OPENEI_PROFILES_PATH", cfg.profiles_path);
  str("OPENEI_DATA_DIR", cfg.data_dir);
  str("OPENEI_ARTIFACT_DIR", cfg.artifact_dir);
  str("OPENEI_DEVICE_ID", cfg.device_id);
  if (auto v = env("OPENEI_PORT")) {
    auto port = count_or_throw(*v, "OPENEI_PORT");
    if (port > 65535) throw Error(ErrorCode::ConfigError, "OPENEI_PORT out of range");
    cfg.port = static_cast<int>(port);
  }
  if (auto v = env("OPENEI_DEFAULT_OBJECTIVE")) {
    cfg.default_objective = objective_or_throw(*v, "OPENEI_DEFAULT_OBJECTIVE");
  }
  if (auto v = env("OPENEI_RING_CAPACITY")) cfg.ring_capacity = count_or_throw(*v, "OPENEI_RING_CAPACITY");
  if (auto v = env("OPENEI_QUEUE_CAPACITY")) {
    cfg.queue_capacity = count_or_throw(*v, "OPENEI_QUEUE_CAPACITY");
  }
  if (auto v = env("OPENEI_WORKERS")) cfg.workers = count_or_throw(*v, "OPENEI_WORKERS");

  if (cfg.port < 0 || cfg.port > 65535) throw Error(ErrorCode::ConfigError, "port out of range");
  if (cfg.ring_capacity == 0 || cfg.queue_capacity == 0 || cfg.workers == 0) {
    throw Error(ErrorCode::ConfigError, "ring_capacity, queue_capacity and workers must be positive");
  }
  for (const auto& d : cfg.devices) {
    try {
      d.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, e.what());
    }
  }
  return cfg;
}

}  // namespace openei
