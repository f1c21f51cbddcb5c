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

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "openei/capability.hpp"
#include "openei/device.hpp"

namespace openei {

enum class Scenario { Vehicles, Safety, Home, Health };

std::string_view to_string(Scenario scenario) noexcept;
std::optional<Scenario> parse_scenario(std::string_view name) noexcept;

/// One registered (model, package) artifact.
struct ModelEntry {
  std::string model_id;
  Scenario scenario = Scenario::Safety;
  std::string task;
  std::string package_id;
  std::uint32_t version = 1;
  std::string artifact_ref;
  std::optional<std::uint64_t> declared_memory_bytes;
  std::map<std::string, AlemProfile> profiles;  // by device_id

  const AlemProfile* profile_for(const std::string& device_id) const;

  bool operator==(const ModelEntry&) const = default;
};

void to_json(nlohmann::json& j, const ModelEntry& e);
void from_json(const nlohmann::json& j, ModelEntry& e);

/// Versioned model catalog. Readers run concurrently; writers are
/// serialized. When bound to a file, every mutation is written through
/// (temp file + rename) before it returns.
class Registry {
 public:
  Registry() = default;
  Registry(const Registry& other);
  Registry& operator=(const Registry& other);

  /// Loads `path` if it exists (otherwise starts empty) and binds the
  /// registry to it for write-through persistence.
  static Registry open(const std::string& path);
  /// Throws Io if unreadable, CorruptFile (detail.line) on a bad line.
  static Registry load(const std::string& path);
  void save(const std::string& path) const;
  void bind(const std::string& path);
  std::optional<std::string> bound_path() const;

  /// Throws DuplicateId when the version is already stored and
  /// VersionRegression when an older version is offered.
  std::string register_model(ModelEntry entry);
  /// Like register_model, but an equal version overwrites the stored one.
  void upsert(ModelEntry entry);

  /// Latest version of every matching model, ordered by model_id.
  std::vector<ModelEntry> lookup(Scenario scenario, const std::string& task) const;
  std::optional<ModelEntry> get(const std::string& model_id) const;
  std::optional<ModelEntry> get(const std::string& model_id, std::uint32_t version) const;
  /// Latest version of every model.
  std::vector<ModelEntry> entries() const;
  /// Every stored version, ordered by (model_id, version).
  std::vector<ModelEntry> history() const;
  std::size_t size() const;

  /// Sets the profile of the latest version for one device. Throws
  /// UnknownModel.
  void attach_profile(const std::string& model_id, const std::string& device_id,
                      const AlemProfile& profile);

 private:
  void validate(const ModelEntry& entry) const;
  void persist_locked() const;
  void write_file(const std::string& path) const;

  mutable std::shared_mutex mutex_;
  std::map<std::string, std::map<std::uint32_t, ModelEntry>> models_;
  std::optional<std::string> path_;
};

}  // namespace openei
